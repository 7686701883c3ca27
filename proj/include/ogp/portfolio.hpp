#ifndef OGP_PORTFOLIO_HPP
#define OGP_PORTFOLIO_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ogp/fof.hpp"
#include "ogp/runtime.hpp"

namespace ogp::portfolio {

struct SyntacticFeatures {
    size_t hypothesis_count = 0;
    std::map<std::string, size_t> predicate_multiset;  // "=" counts equality
    bool dd_vocabulary_only = true;
    bool has_quantifiers = false;
    size_t max_formula_depth = 0;
};

// Order-insensitive syntactic profile of a problem. Equality atoms count
// under the pseudo-predicate "=".
SyntacticFeatures extract_features(const fof::FofDocument& doc);

// Condition names: "dd_vocabulary_only", "has_quantifiers", "always",
// each negatable with a '!' prefix. "@externals" in a preference list
// expands to the registry's external provers in registry order.
struct PolicyRule {
    std::string condition;
    std::vector<std::string> prefer;
};

struct PolicyTable {
    std::vector<PolicyRule> rules;
    std::vector<std::string> default_prefer;
};

PolicyTable default_policy();
PolicyTable policy_from_json(const std::string& json_text);
PolicyTable load_policy(const std::string& path);

struct PortfolioPlan {
    std::vector<std::pair<std::string, std::int64_t>> slots;  // (prover, budget ms)
};

// First matching rule fixes the preference order; budgets are 60% to the
// first slot, the remainder split evenly with the leftover on the last
// slot. Unregistered provers are skipped; an empty plan is an error.
PortfolioPlan select(const SyntacticFeatures& features, const runtime::Registry& registry,
                     const PolicyTable& policy, std::int64_t global_timeout_ms);

// Sequential: run slots in order, stop at the first definitive verdict.
// Parallel: all slots start concurrently with the full global budget and
// the first definitive verdict cancels the rest.
runtime::RunReport execute(const PortfolioPlan& plan, const runtime::Registry& registry,
                           const std::string& conjecture_file, runtime::Format source_format,
                           bool parallel = false);

}  // namespace ogp::portfolio

#endif
