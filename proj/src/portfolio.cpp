#include "ogp/portfolio.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace ogp::portfolio {

using runtime::Registry;
using runtime::RunReport;

namespace {

const std::set<std::string>& dd_vocabulary() {
    static const std::set<std::string> v = {"coll", "para",    "perp",   "midp",
                                            "cong", "eqangle", "cyclic", "circle"};
    return v;
}

size_t depth_of(const fof::Formula& f) {
    size_t best = 0;
    for (const auto& c : f.children) best = std::max(best, depth_of(c));
    return 1 + best;
}

void collect(const fof::Formula& f, SyntacticFeatures& out) {
    switch (f.kind) {
        case fof::FormulaKind::Atom:
            ++out.predicate_multiset[f.predicate];
            break;
        case fof::FormulaKind::Equality:
            ++out.predicate_multiset["="];
            break;
        case fof::FormulaKind::Forall:
        case fof::FormulaKind::Exists:
            out.has_quantifiers = true;
            break;
        default:
            break;
    }
    for (const auto& c : f.children) collect(c, out);
}

}  // namespace

SyntacticFeatures extract_features(const fof::FofDocument& doc) {
    SyntacticFeatures out;
    for (const auto& af : doc.formulas) {
        if (af.role == fof::Role::Hypothesis) ++out.hypothesis_count;
        collect(af.formula, out);
        out.max_formula_depth = std::max(out.max_formula_depth, depth_of(af.formula));
    }
    out.dd_vocabulary_only = true;
    for (const auto& [pred, count] : out.predicate_multiset)
        if (!dd_vocabulary().count(pred)) out.dd_vocabulary_only = false;
    return out;
}

PolicyTable default_policy() {
    PolicyTable t;
    t.rules.push_back({"dd_vocabulary_only", {"ddfa", "@externals"}});
    t.default_prefer = {"@externals", "ddfa"};
    return t;
}

namespace {

bool valid_condition(const std::string& cond) {
    std::string c = cond;
    if (!c.empty() && c[0] == '!') c = c.substr(1);
    return c == "dd_vocabulary_only" || c == "has_quantifiers" || c == "always";
}

bool condition_holds(const std::string& cond, const SyntacticFeatures& f) {
    bool negate = !cond.empty() && cond[0] == '!';
    std::string c = negate ? cond.substr(1) : cond;
    bool value = false;
    if (c == "dd_vocabulary_only")
        value = f.dd_vocabulary_only;
    else if (c == "has_quantifiers")
        value = f.has_quantifiers;
    else if (c == "always")
        value = true;
    return negate ? !value : value;
}

}  // namespace

PolicyTable policy_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed policy JSON: ") + e.what());
    }
    PolicyTable t;
    try {
        if (j.contains("rules"))
            for (const auto& r : j["rules"]) {
                PolicyRule rule;
                rule.condition = r.at("when").get<std::string>();
                if (!valid_condition(rule.condition))
                    throw std::runtime_error("policy: unknown condition '" + rule.condition +
                                             "'");
                for (const auto& p : r.at("prefer"))
                    rule.prefer.push_back(p.get<std::string>());
                t.rules.push_back(std::move(rule));
            }
        for (const auto& p : j.at("default")) t.default_prefer.push_back(p.get<std::string>());
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("policy JSON: ") + e.what());
    }
    if (t.default_prefer.empty()) throw std::runtime_error("policy: empty default list");
    return t;
}

PolicyTable load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open policy file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return policy_from_json(buf.str());
}

PortfolioPlan select(const SyntacticFeatures& features, const Registry& registry,
                     const PolicyTable& policy, std::int64_t global_timeout_ms) {
    const std::vector<std::string>* preference = &policy.default_prefer;
    for (const auto& rule : policy.rules)
        if (condition_holds(rule.condition, features)) {
            preference = &rule.prefer;
            break;
        }

    std::vector<std::string> provers;
    std::set<std::string> seen;
    auto add = [&](const std::string& name) {
        if (registry.find(name) && seen.insert(name).second) provers.push_back(name);
    };
    for (const auto& token : *preference) {
        if (token == "@externals") {
            for (const auto& name : registry.external_names()) add(name);
        } else {
            add(token);
        }
    }
    if (provers.empty())
        throw std::runtime_error("portfolio: no preferred prover is registered");

    PortfolioPlan plan;
    size_t n = provers.size();
    if (n == 1) {
        plan.slots.emplace_back(provers[0], global_timeout_ms);
        return plan;
    }
    std::int64_t first = global_timeout_ms * 6 / 10;
    std::int64_t rest = global_timeout_ms - first;
    std::int64_t each = rest / static_cast<std::int64_t>(n - 1);
    plan.slots.emplace_back(provers[0], first);
    for (size_t i = 1; i < n; ++i) {
        std::int64_t budget = each;
        if (i == n - 1) budget = rest - each * static_cast<std::int64_t>(n - 2);
        plan.slots.emplace_back(provers[i], budget);
    }
    return plan;
}

namespace {

std::string slot_summary(const std::vector<std::pair<std::string, RunReport>>& results) {
    std::string s = "slots:";
    for (const auto& [name, report] : results)
        s += " " + name + "=" + status_name(report.status) + "(" +
             std::to_string(report.time_ms) + "ms)";
    return s;
}

bool definitive(Status s) { return s == Status::Proved || s == Status::Disproved; }

}  // namespace

RunReport execute(const PortfolioPlan& plan, const Registry& registry,
                  const std::string& conjecture_file, runtime::Format source_format,
                  bool parallel) {
    auto t0 = Clock::now();
    auto elapsed = [&] {
        return std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0)
            .count();
    };

    std::vector<std::pair<std::string, RunReport>> results;
    std::optional<RunReport> winner;

    if (!parallel) {
        for (const auto& [name, budget] : plan.slots) {
            const auto* spec = registry.find(name);
            if (!spec) continue;  // plan invariant: built from this registry
            RunReport r = runtime::run(*spec, conjecture_file, source_format, budget);
            results.emplace_back(name, r);
            if (definitive(r.status)) {
                winner = r;
                break;
            }
        }
    } else {
        std::int64_t global = 0;
        for (const auto& [name, budget] : plan.slots) global += budget;
        std::vector<std::atomic<bool>> cancels(plan.slots.size());
        std::vector<RunReport> slot_reports(plan.slots.size());
        std::mutex mu;
        std::optional<size_t> winner_idx;
        std::vector<std::thread> threads;
        for (size_t i = 0; i < plan.slots.size(); ++i) {
            threads.emplace_back([&, i] {
                const auto* spec = registry.find(plan.slots[i].first);
                if (!spec) return;
                RunReport r = runtime::run(*spec, conjecture_file, source_format, global, {},
                                           &cancels[i]);
                std::lock_guard<std::mutex> lock(mu);
                slot_reports[i] = r;
                if (definitive(r.status) && !winner_idx) {
                    winner_idx = i;
                    for (size_t k = 0; k < cancels.size(); ++k)
                        if (k != i) cancels[k].store(true);
                }
            });
        }
        for (auto& t : threads) t.join();
        for (size_t i = 0; i < plan.slots.size(); ++i)
            results.emplace_back(plan.slots[i].first, slot_reports[i]);
        if (winner_idx) winner = slot_reports[*winner_idx];
    }

    RunReport aggregate;
    if (winner) {
        aggregate = *winner;
    } else {
        aggregate.prover = "portfolio";
        aggregate.status = Status::Unknown;
    }
    aggregate.time_ms = elapsed();
    if (!aggregate.detail.empty()) aggregate.detail += "; ";
    aggregate.detail += slot_summary(results);
    return aggregate;
}

}  // namespace ogp::portfolio
