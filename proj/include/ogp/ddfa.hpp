#ifndef OGP_DDFA_HPP
#define OGP_DDFA_HPP

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "ogp/fof.hpp"
#include "ogp/status.hpp"

namespace ogp::ddfa {

using fof::GroundAtom;
using fof::HornRule;
using fof::NamedFact;

// Geometric predicate table: name -> arity. distinct/2 is a rule guard,
// not a fact predicate, and is deliberately absent.
const std::map<std::string, int>& predicate_table();

// All distinct argument tuples in the atom's symmetry orbit, sorted.
// coll/3 and cyclic/4: full permutation; midp: swap of the two endpoints;
// circle: permutation of the three circle points; para/cong: swaps within
// each pair plus the pair swap; perp: swaps within each pair only;
// eqangle: swap of the two four-argument angle blocks.
std::vector<std::vector<std::string>> orbit(const std::string& predicate,
                                            const std::vector<std::string>& args);

// Lexicographically least orbit member. Throws on unknown predicate or
// arity mismatch.
GroundAtom canonicalize(const GroundAtom& atom);

struct ProofNode {
    GroundAtom fact;
    bool given = false;
    std::string label;             // hypothesis name (given) or rule id (derived)
    std::vector<size_t> premises;  // indices of earlier nodes, derived only
};

class FactBase {
public:
    // Returns the node index; inserts only if the canonical fact is new.
    std::optional<size_t> insert(ProofNode node);
    bool contains(const GroundAtom& canonical) const;
    std::optional<size_t> find(const GroundAtom& canonical) const;

    const std::vector<ProofNode>& nodes() const { return nodes_; }
    size_t size() const { return nodes_.size(); }

    // Candidate node indices for a premise with the given predicate; if
    // first_arg is nonempty and the predicate's symmetries fix argument 0,
    // the narrower first-argument index is used.
    const std::vector<size_t>& candidates(const std::string& predicate,
                                          const std::string& first_arg) const;

private:
    std::vector<ProofNode> nodes_;
    std::set<GroundAtom> present_;
    std::map<std::string, std::vector<size_t>> by_predicate_;
    std::map<std::pair<std::string, std::string>, std::vector<size_t>> by_first_arg_;
};

struct SaturationLimits {
    size_t max_facts = 100000;
    size_t max_rounds = 1000;
    std::int64_t timeout_ms = 60000;
};

enum class StopReason { Fixpoint, GoalReached, MaxFacts, MaxRounds, Timeout, Cancelled };

struct SaturationStats {
    size_t rounds = 0;
    size_t derived = 0;
    std::int64_t elapsed_ms = 0;
    StopReason stop = StopReason::Fixpoint;
};

struct SaturationResult {
    FactBase base;
    SaturationStats stats;
};

// Semi-naive saturation to a fixpoint (or a limit). Facts are
// canonicalized on entry; premise matching considers every orbit variant
// of a stored fact. Deterministic given input order. If stop_goal is set,
// saturation ends as soon as the goal is present.
SaturationResult saturate(const std::vector<NamedFact>& facts,
                          const std::vector<HornRule>& rules, const SaturationLimits& limits,
                          const GroundAtom* stop_goal = nullptr,
                          const std::atomic<bool>* cancel = nullptr);

struct ProveResult {
    Status status = Status::Unknown;
    std::int64_t time_ms = 0;
    std::string proof;  // serialized goal slice, Proved only
    std::string detail;
    SaturationStats stats;
};

// Full native pipeline over a flattened document: Horn extraction,
// saturation, goal check, proof slicing. to_horn_rules failures surface
// as Status::Error.
ProveResult prove(const fof::FofDocument& doc, const SaturationLimits& limits,
                  const std::atomic<bool>* cancel = nullptr);

// One step per line: `<n>. <fact>  [Given <name>]` or
// `<n>. <fact>  [<rule>: <i>, <j>, ...]`. Only ancestors of the goal,
// numbered from 1 in derivation order; the last step is the goal.
std::string serialize_proof(const FactBase& base, size_t goal_node);

struct ReplayResult {
    bool ok = false;
    std::string error;
};

// Independent check of a serialized proof against the problem: every
// given step must be a hypothesis, every derived step a correct rule
// instance, and the final fact the goal.
ReplayResult replay(const std::string& proof, const fof::FofDocument& doc);

}  // namespace ogp::ddfa

#endif
