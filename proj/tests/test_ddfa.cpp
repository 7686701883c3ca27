#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <atomic>
#include <map>
#include <random>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "ogp/ddfa.hpp"
#include "ogp/fof.hpp"

using namespace ogp;
using ddfa::canonicalize;
using fof::GroundAtom;

namespace {

fof::FofDocument flat_fixture(const std::string& rel) {
    auto doc = fof::parse_fof(testutil::slurp(testutil::fixture(rel)));
    return fof::resolve_includes(doc, {testutil::fixture_dir()});
}

// Parses the bundled axiom file together with the given facts and goal.
fof::HornProblem axiom_problem(const std::string& extra) {
    auto text = testutil::slurp(testutil::fixture("axioms/ddfa.ax")) + extra;
    return fof::to_horn_rules(fof::parse_fof(text));
}

// --- oracle 1: orbit closure from generating permutations ---------------

using Perm = std::vector<size_t>;

std::map<std::string, std::vector<Perm>> orbit_generators() {
    auto transpose = [](size_t n, size_t i, size_t j) {
        Perm p(n);
        for (size_t k = 0; k < n; ++k) p[k] = k;
        std::swap(p[i], p[j]);
        return p;
    };
    std::map<std::string, std::vector<Perm>> g;
    g["coll"] = {transpose(3, 0, 1), transpose(3, 1, 2)};
    g["cyclic"] = {transpose(4, 0, 1), transpose(4, 1, 2), transpose(4, 2, 3)};
    g["midp"] = {transpose(3, 1, 2)};
    g["circle"] = {transpose(4, 1, 2), transpose(4, 2, 3)};
    g["para"] = {transpose(4, 0, 1), transpose(4, 2, 3), Perm{2, 3, 0, 1}};
    g["cong"] = g["para"];
    g["perp"] = {transpose(4, 0, 1), transpose(4, 2, 3)};
    g["eqangle"] = {Perm{4, 5, 6, 7, 0, 1, 2, 3}};
    return g;
}

std::set<std::vector<std::string>> orbit_closure(const std::vector<Perm>& gens,
                                                 const std::vector<std::string>& args) {
    std::set<std::vector<std::string>> seen{args};
    std::vector<std::vector<std::string>> frontier{args};
    while (!frontier.empty()) {
        std::vector<std::vector<std::string>> next;
        for (const auto& tuple : frontier)
            for (const auto& p : gens) {
                std::vector<std::string> image(tuple.size());
                for (size_t i = 0; i < p.size(); ++i) image[i] = tuple[p[i]];
                if (seen.insert(image).second) next.push_back(std::move(image));
            }
        frontier = std::move(next);
    }
    return seen;
}

// --- oracle 2: naive fixpoint by substitution enumeration ----------------

std::set<GroundAtom> naive_fixpoint(const fof::HornProblem& hp) {
    std::set<std::string> universe;
    std::set<GroundAtom> base;
    for (const auto& f : hp.facts) {
        base.insert(canonicalize(f.atom));
        for (const auto& a : f.atom.args) universe.insert(a);
    }
    for (const auto& a : hp.goal.args) universe.insert(a);
    std::vector<std::string> consts(universe.begin(), universe.end());
    REQUIRE(consts.size() <= 8);

    // Brute-force substitution enumeration, pruned only by checking each
    // premise as soon as all of its variables are assigned. No indexes, no
    // delta sets: independent of the engine's evaluation strategy.
    bool changed = true;
    while (changed) {
        changed = false;
        std::set<std::string> present;
        for (const auto& f : base) present.insert(f.predicate);
        for (const auto& rule : hp.rules) {
            // A rule whose premise predicate has no facts can fire nothing.
            bool feasible = true;
            for (const auto& p : rule.premises)
                if (!present.count(p.predicate)) feasible = false;
            if (!feasible) continue;
            std::vector<std::string> vars;
            for (const auto& p : rule.premises)
                for (const auto& t : p.args)
                    if (t.is_variable &&
                        std::find(vars.begin(), vars.end(), t.name) == vars.end())
                        vars.push_back(t.name);
            std::map<std::string, std::string> sub;
            auto instantiate = [&](const fof::HornAtom& a) {
                GroundAtom g;
                g.predicate = a.predicate;
                for (const auto& t : a.args)
                    g.args.push_back(t.is_variable ? sub.at(t.name) : t.name);
                return g;
            };
            // Premise index -> last variable position it waits for.
            std::vector<size_t> ready_at(rule.premises.size(), 0);
            for (size_t pi = 0; pi < rule.premises.size(); ++pi)
                for (const auto& t : rule.premises[pi].args)
                    if (t.is_variable)
                        ready_at[pi] = std::max(
                            ready_at[pi],
                            size_t(std::find(vars.begin(), vars.end(), t.name) - vars.begin()) +
                                1);
            std::function<void(size_t)> assign = [&](size_t depth) {
                for (size_t pi = 0; pi < rule.premises.size(); ++pi)
                    if (ready_at[pi] == depth &&
                        !base.count(canonicalize(instantiate(rule.premises[pi]))))
                        return;
                if (depth == vars.size()) {
                    for (const auto& [x, y] : rule.guards)
                        if (sub.at(x) == sub.at(y)) return;
                    if (base.insert(canonicalize(instantiate(rule.conclusion))).second)
                        changed = true;
                    return;
                }
                for (const auto& c : consts) {
                    sub[vars[depth]] = c;
                    assign(depth + 1);
                }
                sub.erase(vars[depth]);
            };
            assign(0);
        }
    }
    return base;
}

std::set<GroundAtom> engine_facts(const fof::HornProblem& hp) {
    auto result = ddfa::saturate(hp.facts, hp.rules, {});
    REQUIRE(result.stats.stop == ddfa::StopReason::Fixpoint);
    std::set<GroundAtom> facts;
    for (const auto& n : result.base.nodes()) facts.insert(n.fact);
    return facts;
}

}  // namespace

TEST_CASE("canonicalize: documented examples") {
    CHECK(canonicalize({"coll", {"c", "a", "b"}}) == GroundAtom{"coll", {"a", "b", "c"}});
    CHECK(canonicalize({"midp", {"m", "b", "a"}}) == GroundAtom{"midp", {"m", "a", "b"}});
    CHECK(canonicalize({"midp", {"b", "m", "a"}}) == GroundAtom{"midp", {"b", "a", "m"}});
    CHECK(canonicalize({"para", {"c", "d", "a", "b"}}) == GroundAtom{"para", {"a", "b", "c", "d"}});
    CHECK(canonicalize({"cong", {"b", "a", "d", "c"}}) == GroundAtom{"cong", {"a", "b", "c", "d"}});
    // perp swaps within pairs but the pairs stay put.
    CHECK(canonicalize({"perp", {"c", "d", "a", "b"}}) == GroundAtom{"perp", {"c", "d", "a", "b"}});
    CHECK(canonicalize({"perp", {"d", "c", "b", "a"}}) == GroundAtom{"perp", {"c", "d", "a", "b"}});
    CHECK(canonicalize({"circle", {"o", "c", "b", "a"}}) ==
          GroundAtom{"circle", {"o", "a", "b", "c"}});
    CHECK(canonicalize({"cyclic", {"d", "c", "b", "a"}}) ==
          GroundAtom{"cyclic", {"a", "b", "c", "d"}});
    CHECK(canonicalize({"eqangle", {"e", "f", "g", "h", "a", "b", "c", "d"}}) ==
          GroundAtom{"eqangle", {"a", "b", "c", "d", "e", "f", "g", "h"}});
    // eqangle blocks swap as wholes; arguments inside a block stay put.
    CHECK(canonicalize({"eqangle", {"b", "a", "c", "d", "e", "f", "g", "h"}}) ==
          GroundAtom{"eqangle", {"b", "a", "c", "d", "e", "f", "g", "h"}});

    CHECK_THROWS(canonicalize({"nosuch", {"a"}}));
    CHECK_THROWS(canonicalize({"coll", {"a", "b"}}));
}

TEST_CASE("canonicalize equals the brute-force orbit minimum (1000 atoms/predicate)") {
    auto gens = orbit_generators();
    std::mt19937 rng(97);
    const std::vector<std::string> pool = {"a", "b", "c", "d", "e"};
    for (const auto& [pred, arity] : ddfa::predicate_table()) {
        REQUIRE(gens.count(pred));
        size_t mismatches = 0;
        for (int i = 0; i < 1000; ++i) {
            std::vector<std::string> args;
            for (int k = 0; k < arity; ++k)
                args.push_back(pool[std::uniform_int_distribution<size_t>(0, 4)(rng)]);
            auto closure = orbit_closure(gens.at(pred), args);
            GroundAtom expect{pred, *closure.begin()};
            if (canonicalize({pred, args}) != expect) ++mismatches;
            // The enumerated orbit must agree with the closure too.
            auto listed = ddfa::orbit(pred, args);
            if (std::set<std::vector<std::string>>(listed.begin(), listed.end()) != closure)
                ++mismatches;
        }
        CAPTURE(pred);
        CHECK(mismatches == 0);
    }
}

TEST_CASE("midline: two facts derive para(m,n,b,c) under the bundled rules") {
    auto hp = axiom_problem(
        "fof(h1,hypothesis,midp(m,a,b)).\n"
        "fof(h2,hypothesis,midp(n,a,c)).\n"
        "fof(goal,conjecture,para(m,n,b,c)).\n");
    auto result = ddfa::saturate(hp.facts, hp.rules, {});
    CHECK(result.base.contains(canonicalize({"para", {"m", "n", "b", "c"}})));
}

TEST_CASE("empty rule list: base equals input facts after 0 rounds") {
    auto hp = axiom_problem(
        "fof(h1,hypothesis,midp(m,a,b)).\n"
        "fof(goal,conjecture,coll(m,a,b)).\n");
    auto result = ddfa::saturate(hp.facts, {}, {});
    CHECK(result.base.size() == 1);
    CHECK(result.stats.rounds == 0);
    CHECK(result.stats.derived == 0);
    CHECK(result.stats.stop == ddfa::StopReason::Fixpoint);
}

TEST_CASE("semi-naive equals the naive fixpoint oracle on Horn corpus problems") {
    for (const auto& file : testutil::corpus_files()) {
        auto doc = fof::parse_fof(testutil::slurp(file));
        fof::HornProblem hp;
        try {
            hp = fof::to_horn_rules(fof::resolve_includes(doc, {testutil::fixture_dir()}));
        } catch (const std::exception&) {
            continue;  // corpus entries outside the Horn subset
        }
        CAPTURE(file);
        CHECK(engine_facts(hp) == naive_fixpoint(hp));
    }
    // Also the flattened Varignon problem itself.
    auto hp = fof::to_horn_rules(flat_fixture("varignon.fof"));
    CHECK(engine_facts(hp) == naive_fixpoint(hp));
}

TEST_CASE("input-order perturbations do not change the fixpoint (20 shuffles)") {
    auto hp = fof::to_horn_rules(flat_fixture("varignon.fof"));
    auto reference = engine_facts(hp);
    std::mt19937 rng(5);
    for (int i = 0; i < 20; ++i) {
        auto facts = hp.facts;
        auto rules = hp.rules;
        std::shuffle(facts.begin(), facts.end(), rng);
        std::shuffle(rules.begin(), rules.end(), rng);
        auto result = ddfa::saturate(facts, rules, {});
        std::set<GroundAtom> got;
        for (const auto& n : result.base.nodes()) got.insert(n.fact);
        CHECK(got == reference);
    }
}

TEST_CASE("prove: Varignon under the bundled axioms") {
    auto doc = flat_fixture("varignon.fof");
    auto result = ddfa::prove(doc, {});
    CHECK(result.status == Status::Proved);
    CHECK(result.time_ms < 1000);
    CHECK(result.stats.derived <= 5000);
    REQUIRE(!result.proof.empty());
    CHECK(result.proof.find("para(p,q,r,s)") != std::string::npos);

    auto rr = ddfa::replay(result.proof, doc);
    CAPTURE(rr.error);
    CHECK(rr.ok);

    // Determinism: same input, same proof and stats.
    auto again = ddfa::prove(doc, {});
    CHECK(again.proof == result.proof);
    CHECK(again.stats.rounds == result.stats.rounds);
    CHECK(again.stats.derived == result.stats.derived);
}

TEST_CASE("prove: goal with no facts and no rules is Unknown after 0 rounds") {
    auto doc = fof::parse_fof("fof(goal,conjecture,coll(a,b,c)).");
    auto result = ddfa::prove(doc, {});
    CHECK(result.status == Status::Unknown);
    CHECK(result.stats.rounds == 0);
    CHECK(result.detail.find("not a refutation") != std::string::npos);
}

TEST_CASE("prove: unprovable fixture reaches a fixpoint as Unknown") {
    auto result = ddfa::prove(flat_fixture("unknown.fof"), {});
    CHECK(result.status == Status::Unknown);
    CHECK(result.stats.stop == ddfa::StopReason::Fixpoint);
}

TEST_CASE("prove: limits and cancellation") {
    auto doc = flat_fixture("varignon.fof");
    ddfa::SaturationLimits tight;
    tight.max_facts = 1;
    auto r1 = ddfa::prove(doc, tight);
    CHECK(r1.status == Status::ResourceOut);
    CHECK(r1.stats.stop == ddfa::StopReason::MaxFacts);

    ddfa::SaturationLimits rounds;
    rounds.max_rounds = 0;
    auto r2 = ddfa::prove(doc, rounds);
    CHECK(r2.status == Status::ResourceOut);
    CHECK(r2.stats.stop == ddfa::StopReason::MaxRounds);

    std::atomic<bool> cancel{true};
    auto r3 = ddfa::prove(doc, {}, &cancel);
    CHECK(r3.status == Status::Timeout);
    CHECK(r3.stats.stop == ddfa::StopReason::Cancelled);
}

TEST_CASE("prove: Horn extraction failures surface as Error") {
    auto doc = fof::parse_fof("fof(a,axiom,p(a) | q(a)).\nfof(goal,conjecture,p(a)).");
    auto result = ddfa::prove(doc, {});
    CHECK(result.status == Status::Error);
    CHECK(!result.detail.empty());
}

TEST_CASE("serialize/replay: goal slice properties") {
    auto doc = flat_fixture("varignon.fof");
    auto result = ddfa::prove(doc, {});
    REQUIRE(result.status == Status::Proved);

    // Steps are numbered 1..n; the last fact is the goal.
    std::istringstream in(result.proof);
    std::string line;
    int expected = 1;
    std::string last;
    while (std::getline(in, line)) {
        CHECK(line.rfind(std::to_string(expected) + ". ", 0) == 0);
        ++expected;
        last = line;
    }
    CHECK(last.find("para(p,q,r,s)") != std::string::npos);

    // Corruptions are detected.
    auto corrupt_fact = result.proof;
    auto pos = corrupt_fact.find("para(p,q,r,s)");
    corrupt_fact.replace(pos, 13, "para(p,q,r,c)");
    CHECK_FALSE(ddfa::replay(corrupt_fact, doc).ok);

    auto corrupt_rule = result.proof;
    pos = corrupt_rule.find("[d4:");
    REQUIRE(pos != std::string::npos);
    corrupt_rule.replace(pos, 4, "[d5:");
    CHECK_FALSE(ddfa::replay(corrupt_rule, doc).ok);

    auto corrupt_given = result.proof;
    pos = corrupt_given.find("[Given h1]");
    REQUIRE(pos != std::string::npos);
    corrupt_given.replace(pos, 10, "[Given h9]");
    CHECK_FALSE(ddfa::replay(corrupt_given, doc).ok);

    // Dropping the first step breaks both numbering and the references.
    auto dropped = result.proof.substr(result.proof.find('\n') + 1);
    CHECK_FALSE(ddfa::replay(dropped, doc).ok);
}

TEST_CASE("replay: empty proof is valid exactly when the goal is a hypothesis") {
    auto diag = flat_fixture("diag.fof");
    auto result = ddfa::prove(diag, {});
    REQUIRE(result.status == Status::Proved);
    CHECK(ddfa::replay(result.proof, diag).ok);
    CHECK(ddfa::replay("", diag).ok);
    CHECK_FALSE(ddfa::replay("", flat_fixture("varignon.fof")).ok);
}

TEST_CASE("goal early-stop reports GoalReached") {
    auto hp = fof::to_horn_rules(flat_fixture("varignon.fof"));
    auto goal = canonicalize(hp.goal);
    auto result = ddfa::saturate(hp.facts, hp.rules, {}, &goal);
    CHECK(result.stats.stop == ddfa::StopReason::GoalReached);
    CHECK(result.base.contains(goal));
}
