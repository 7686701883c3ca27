#include "ogp/ddfa.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <functional>
#include <sstream>

namespace ogp::ddfa {

using Clock = std::chrono::steady_clock;

const std::map<std::string, int>& predicate_table() {
    static const std::map<std::string, int> table = {
        {"coll", 3}, {"midp", 3},    {"para", 4},   {"perp", 4},
        {"cong", 4}, {"eqangle", 8}, {"cyclic", 4}, {"circle", 4},
    };
    return table;
}

namespace {

bool fixes_first_arg(const std::string& predicate) {
    return predicate == "midp" || predicate == "circle";
}

void permutations_into(std::vector<std::string> items,
                       std::vector<std::vector<std::string>>& out) {
    std::sort(items.begin(), items.end());
    do {
        out.push_back(items);
    } while (std::next_permutation(items.begin(), items.end()));
}

}  // namespace

std::vector<std::vector<std::string>> orbit(const std::string& predicate,
                                            const std::vector<std::string>& args) {
    auto it = predicate_table().find(predicate);
    if (it == predicate_table().end())
        throw std::runtime_error("unknown predicate '" + predicate + "'");
    if (static_cast<int>(args.size()) != it->second)
        throw std::runtime_error("arity mismatch for '" + predicate + "': got " +
                                 std::to_string(args.size()) + ", expected " +
                                 std::to_string(it->second));

    std::vector<std::vector<std::string>> out;
    if (predicate == "coll" || predicate == "cyclic") {
        permutations_into(args, out);
    } else if (predicate == "circle") {
        std::vector<std::vector<std::string>> rest;
        permutations_into({args[1], args[2], args[3]}, rest);
        for (auto& r : rest) out.push_back({args[0], r[0], r[1], r[2]});
    } else if (predicate == "midp") {
        out.push_back({args[0], args[1], args[2]});
        out.push_back({args[0], args[2], args[1]});
    } else if (predicate == "para" || predicate == "cong") {
        for (int swap_first : {0, 1})
            for (int swap_second : {0, 1})
                for (int swap_pairs : {0, 1}) {
                    std::string a = args[swap_first ? 1 : 0], b = args[swap_first ? 0 : 1];
                    std::string c = args[swap_second ? 3 : 2], d = args[swap_second ? 2 : 3];
                    out.push_back(swap_pairs ? std::vector<std::string>{c, d, a, b}
                                             : std::vector<std::string>{a, b, c, d});
                }
    } else if (predicate == "perp") {
        for (int swap_first : {0, 1})
            for (int swap_second : {0, 1})
                out.push_back({args[swap_first ? 1 : 0], args[swap_first ? 0 : 1],
                               args[swap_second ? 3 : 2], args[swap_second ? 2 : 3]});
    } else {  // eqangle
        out.push_back(args);
        out.push_back({args[4], args[5], args[6], args[7], args[0], args[1], args[2], args[3]});
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

GroundAtom canonicalize(const GroundAtom& atom) {
    return {atom.predicate, orbit(atom.predicate, atom.args).front()};
}

// --- FactBase ---------------------------------------------------------

std::optional<size_t> FactBase::insert(ProofNode node) {
    if (!present_.insert(node.fact).second) return std::nullopt;
    size_t idx = nodes_.size();
    by_predicate_[node.fact.predicate].push_back(idx);
    if (!node.fact.args.empty())
        by_first_arg_[{node.fact.predicate, node.fact.args[0]}].push_back(idx);
    nodes_.push_back(std::move(node));
    return idx;
}

bool FactBase::contains(const GroundAtom& canonical) const {
    return present_.count(canonical) != 0;
}

std::optional<size_t> FactBase::find(const GroundAtom& canonical) const {
    if (!present_.count(canonical)) return std::nullopt;
    auto it = by_predicate_.find(canonical.predicate);
    for (size_t idx : it->second)
        if (nodes_[idx].fact == canonical) return idx;
    return std::nullopt;
}

const std::vector<size_t>& FactBase::candidates(const std::string& predicate,
                                                const std::string& first_arg) const {
    static const std::vector<size_t> empty;
    if (!first_arg.empty() && fixes_first_arg(predicate)) {
        auto it = by_first_arg_.find({predicate, first_arg});
        return it == by_first_arg_.end() ? empty : it->second;
    }
    auto it = by_predicate_.find(predicate);
    return it == by_predicate_.end() ? empty : it->second;
}

// --- Saturation -------------------------------------------------------

namespace {

using Subst = std::map<std::string, std::string>;

bool unify_args(const fof::HornAtom& premise, const std::vector<std::string>& variant,
                Subst& theta, std::vector<std::string>& bound_here) {
    for (size_t i = 0; i < premise.args.size(); ++i) {
        const auto& ref = premise.args[i];
        if (!ref.is_variable) {
            if (ref.name != variant[i]) return false;
            continue;
        }
        auto it = theta.find(ref.name);
        if (it == theta.end()) {
            theta[ref.name] = variant[i];
            bound_here.push_back(ref.name);
        } else if (it->second != variant[i]) {
            return false;
        }
    }
    return true;
}

std::string resolve_name(const std::string& name, const Subst& theta) {
    if (!name.empty() && std::isupper(static_cast<unsigned char>(name[0]))) {
        auto it = theta.find(name);
        return it == theta.end() ? name : it->second;
    }
    return name;
}

bool guards_hold(const HornRule& rule, const Subst& theta) {
    for (const auto& [x, y] : rule.guards)
        if (resolve_name(x, theta) == resolve_name(y, theta)) return false;
    return true;
}

GroundAtom instantiate(const fof::HornAtom& atom, const Subst& theta) {
    GroundAtom g;
    g.predicate = atom.predicate;
    for (const auto& ref : atom.args)
        g.args.push_back(ref.is_variable ? theta.at(ref.name) : ref.name);
    return g;
}

void check_rule_arities(const std::vector<HornRule>& rules) {
    auto check = [](const std::string& rule_id, const fof::HornAtom& a) {
        auto it = predicate_table().find(a.predicate);
        if (it == predicate_table().end())
            throw std::runtime_error("rule '" + rule_id + "': unknown predicate '" +
                                     a.predicate + "'");
        if (static_cast<int>(a.args.size()) != it->second)
            throw std::runtime_error("rule '" + rule_id + "': predicate '" + a.predicate +
                                     "' expects " + std::to_string(it->second) + " arguments");
    };
    for (const auto& r : rules) {
        for (const auto& p : r.premises) check(r.id, p);
        check(r.id, r.conclusion);
    }
}

struct SaturationRun {
    const std::vector<HornRule>& rules;
    const SaturationLimits& limits;
    const GroundAtom* stop_goal;
    const std::atomic<bool>* cancel;
    Clock::time_point start;

    FactBase base;
    SaturationStats stats;
    bool stopped = false;

    bool over_deadline() {
        auto elapsed =
            std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - start);
        return elapsed.count() >= limits.timeout_ms;
    }

    // Returns false when saturation must stop.
    bool emit(const HornRule& rule, const Subst& theta, const std::vector<size_t>& chosen) {
        if (!guards_hold(rule, theta)) return true;
        GroundAtom fact = canonicalize(instantiate(rule.conclusion, theta));
        auto idx = base.insert({fact, false, rule.id, chosen});
        if (!idx) return true;
        ++stats.derived;
        if (stop_goal && fact == *stop_goal) {
            stats.stop = StopReason::GoalReached;
            return false;
        }
        if (base.size() >= limits.max_facts) {
            stats.stop = StopReason::MaxFacts;
            return false;
        }
        return true;
    }

    bool match(const HornRule& rule, size_t i, size_t delta_pos, size_t delta_begin,
               size_t delta_end, Subst& theta, std::vector<size_t>& chosen) {
        if (cancel && cancel->load()) {
            stats.stop = StopReason::Cancelled;
            return false;
        }
        if (over_deadline()) {
            stats.stop = StopReason::Timeout;
            return false;
        }
        if (i == rule.premises.size()) return emit(rule, theta, chosen);

        const auto& premise = rule.premises[i];
        std::string first_arg;
        if (!premise.args.empty()) first_arg = resolve_name(premise.args[0].name, theta);
        if (!first_arg.empty() && std::isupper(static_cast<unsigned char>(first_arg[0])))
            first_arg.clear();  // still unbound

        // Snapshot: insertions during matching must stay invisible.
        std::vector<size_t> cands;
        size_t hi = i < delta_pos ? delta_begin : delta_end;
        size_t lo = i == delta_pos ? delta_begin : 0;
        for (size_t idx : base.candidates(premise.predicate, first_arg)) {
            if (idx >= hi) break;
            if (idx >= lo) cands.push_back(idx);
        }
        for (size_t idx : cands) {
            for (const auto& variant : orbit(premise.predicate, base.nodes()[idx].fact.args)) {
                std::vector<std::string> bound_here;
                if (unify_args(premise, variant, theta, bound_here)) {
                    chosen.push_back(idx);
                    bool keep = match(rule, i + 1, delta_pos, delta_begin, delta_end, theta,
                                      chosen);
                    chosen.pop_back();
                    for (const auto& v : bound_here) theta.erase(v);
                    if (!keep) return false;
                } else {
                    for (const auto& v : bound_here) theta.erase(v);
                }
            }
        }
        return true;
    }
};

}  // namespace

SaturationResult saturate(const std::vector<NamedFact>& facts,
                          const std::vector<HornRule>& rules, const SaturationLimits& limits,
                          const GroundAtom* stop_goal, const std::atomic<bool>* cancel) {
    check_rule_arities(rules);
    SaturationRun run{rules, limits, stop_goal, cancel, Clock::now(), {}, {}};

    bool goal_given = false;
    for (const auto& nf : facts) {
        GroundAtom canonical = canonicalize(nf.atom);
        run.base.insert({canonical, true, nf.name, {}});
        if (stop_goal && canonical == *stop_goal) goal_given = true;
    }

    auto finish = [&](SaturationResult&& r) {
        r.stats.elapsed_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - run.start)
                .count();
        return std::move(r);
    };

    if (goal_given) {
        run.stats.stop = StopReason::GoalReached;
        return finish({std::move(run.base), run.stats});
    }

    size_t delta_begin = 0;
    size_t delta_end = run.base.size();
    for (;;) {
        if (run.stats.rounds >= limits.max_rounds) {
            run.stats.stop = StopReason::MaxRounds;
            break;
        }
        size_t before = run.base.size();
        bool keep_going = true;
        for (const auto& rule : rules) {
            for (size_t d = 0; d < rule.premises.size() && keep_going; ++d) {
                Subst theta;
                std::vector<size_t> chosen;
                keep_going = run.match(rule, 0, d, delta_begin, delta_end, theta, chosen);
            }
            if (!keep_going) break;
        }
        if (!keep_going) break;  // stop reason already recorded
        if (run.base.size() == before) {
            run.stats.stop = StopReason::Fixpoint;
            break;
        }
        ++run.stats.rounds;
        delta_begin = delta_end;
        delta_end = run.base.size();
    }
    return finish({std::move(run.base), run.stats});
}

// --- Proof serialization and replay ------------------------------------

std::string serialize_proof(const FactBase& base, size_t goal_node) {
    // Ancestor slice, in insertion order.
    std::vector<bool> needed(base.size(), false);
    std::vector<size_t> stack{goal_node};
    while (!stack.empty()) {
        size_t n = stack.back();
        stack.pop_back();
        if (needed[n]) continue;
        needed[n] = true;
        for (size_t p : base.nodes()[n].premises) stack.push_back(p);
    }
    std::vector<size_t> renumber(base.size(), 0);
    std::ostringstream out;
    size_t next = 0;
    for (size_t n = 0; n < base.size(); ++n) {
        if (!needed[n]) continue;
        renumber[n] = ++next;
        const auto& node = base.nodes()[n];
        out << next << ". " << fof::to_string(node.fact) << "  [";
        if (node.given) {
            out << "Given " << node.label;
        } else {
            out << node.label << ":";
            for (size_t i = 0; i < node.premises.size(); ++i)
                out << (i ? ", " : " ") << renumber[node.premises[i]];
        }
        out << "]\n";
    }
    return out.str();
}

ProveResult prove(const fof::FofDocument& doc, const SaturationLimits& limits,
                  const std::atomic<bool>* cancel) {
    ProveResult result;
    auto t0 = Clock::now();
    auto record_time = [&] {
        result.time_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
    };
    fof::HornProblem horn;
    GroundAtom goal;
    try {
        horn = fof::to_horn_rules(doc);
        goal = canonicalize(horn.goal);
    } catch (const std::exception& e) {
        result.status = Status::Error;
        result.detail = e.what();
        record_time();
        return result;
    }
    SaturationResult sat;
    try {
        sat = saturate(horn.facts, horn.rules, limits, &goal, cancel);
    } catch (const std::exception& e) {
        result.status = Status::Error;
        result.detail = e.what();
        record_time();
        return result;
    }
    result.stats = sat.stats;
    if (auto idx = sat.base.find(goal)) {
        result.status = Status::Proved;
        result.proof = serialize_proof(sat.base, *idx);
    } else {
        switch (sat.stats.stop) {
            case StopReason::Fixpoint:
                result.status = Status::Unknown;
                result.detail = "fixpoint reached without the goal (not a refutation)";
                break;
            case StopReason::Timeout:
                result.status = Status::Timeout;
                break;
            case StopReason::Cancelled:
                result.status = Status::Timeout;
                result.detail = "cancelled";
                break;
            case StopReason::MaxFacts:
            case StopReason::MaxRounds:
                result.status = Status::ResourceOut;
                result.detail = sat.stats.stop == StopReason::MaxFacts ? "fact limit reached"
                                                                       : "round limit reached";
                break;
            case StopReason::GoalReached:
                result.status = Status::Unknown;  // unreachable: goal not in base
                break;
        }
    }
    record_time();
    return result;
}

namespace {

struct ProofStep {
    GroundAtom fact;
    bool given = false;
    std::string label;
    std::vector<size_t> premises;  // 1-based step numbers
};

GroundAtom parse_step_atom(const std::string& text, size_t lineno) {
    auto open = text.find('(');
    auto close = text.rfind(')');
    if (open == std::string::npos || close == std::string::npos || close < open)
        throw std::runtime_error("step " + std::to_string(lineno) + ": malformed fact '" +
                                 text + "'");
    GroundAtom atom;
    atom.predicate = text.substr(0, open);
    std::string args = text.substr(open + 1, close - open - 1);
    std::stringstream ss(args);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(" \t"));
        item.erase(item.find_last_not_of(" \t") + 1);
        atom.args.push_back(item);
    }
    return atom;
}

std::vector<ProofStep> parse_proof(const std::string& proof) {
    std::vector<ProofStep> steps;
    std::istringstream in(proof);
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        size_t expected = steps.size() + 1;
        auto dot = line.find('.');
        auto lbr = line.find('[');
        auto rbr = line.rfind(']');
        if (dot == std::string::npos || lbr == std::string::npos ||
            rbr == std::string::npos || rbr < lbr)
            throw std::runtime_error("step " + std::to_string(expected) +
                                     ": malformed proof line");
        if (std::stoul(line.substr(0, dot)) != expected)
            throw std::runtime_error("step " + std::to_string(expected) +
                                     ": out-of-order step number");
        std::string fact_text = line.substr(dot + 1, lbr - dot - 1);
        fact_text.erase(0, fact_text.find_first_not_of(" \t"));
        fact_text.erase(fact_text.find_last_not_of(" \t") + 1);
        ProofStep step;
        step.fact = parse_step_atom(fact_text, expected);
        std::string just = line.substr(lbr + 1, rbr - lbr - 1);
        if (just.rfind("Given ", 0) == 0) {
            step.given = true;
            step.label = just.substr(6);
        } else {
            auto colon = just.find(':');
            if (colon == std::string::npos)
                throw std::runtime_error("step " + std::to_string(expected) +
                                         ": malformed justification");
            step.label = just.substr(0, colon);
            std::stringstream refs(just.substr(colon + 1));
            std::string ref;
            while (std::getline(refs, ref, ',')) {
                size_t n = std::stoul(ref);
                if (n == 0 || n >= expected)
                    throw std::runtime_error("step " + std::to_string(expected) +
                                             ": premise reference " + std::to_string(n) +
                                             " out of range");
                step.premises.push_back(n);
            }
        }
        steps.push_back(std::move(step));
    }
    return steps;
}

}  // namespace

ReplayResult replay(const std::string& proof, const fof::FofDocument& doc) {
    fof::HornProblem horn;
    std::vector<ProofStep> steps;
    try {
        horn = fof::to_horn_rules(doc);
        steps = parse_proof(proof);
    } catch (const std::exception& e) {
        return {false, e.what()};
    }
    std::map<std::string, GroundAtom> hypotheses;
    for (const auto& nf : horn.facts) hypotheses[nf.name] = canonicalize(nf.atom);
    GroundAtom goal;
    try {
        goal = canonicalize(horn.goal);
    } catch (const std::exception& e) {
        return {false, e.what()};
    }

    if (steps.empty()) {
        for (const auto& [name, atom] : hypotheses)
            if (atom == goal) return {true, ""};
        return {false, "empty proof and the goal is not a hypothesis"};
    }

    for (size_t k = 0; k < steps.size(); ++k) {
        const auto& step = steps[k];
        std::string where = "step " + std::to_string(k + 1);
        GroundAtom stated;
        try {
            stated = canonicalize(step.fact);
        } catch (const std::exception& e) {
            return {false, where + ": " + e.what()};
        }
        if (stated != step.fact)
            return {false, where + ": fact is not in canonical form"};
        if (step.given) {
            auto it = hypotheses.find(step.label);
            if (it == hypotheses.end())
                return {false, where + ": no hypothesis named '" + step.label + "'"};
            if (it->second != stated)
                return {false, where + ": fact does not match hypothesis '" + step.label + "'"};
            continue;
        }
        const HornRule* rule = nullptr;
        for (const auto& r : horn.rules)
            if (r.id == step.label) {
                rule = &r;
                break;
            }
        if (!rule) return {false, where + ": no rule named '" + step.label + "'"};
        if (step.premises.size() != rule->premises.size())
            return {false, where + ": rule '" + step.label + "' expects " +
                               std::to_string(rule->premises.size()) + " premises"};
        std::vector<GroundAtom> premise_facts;
        for (size_t ref : step.premises) premise_facts.push_back(steps[ref - 1].fact);

        bool matched = false;
        // The conclusion must also come out right, so enumerate matches
        // and check each instantiation.
        std::function<bool(size_t, Subst&)> search = [&](size_t i, Subst& theta) -> bool {
            if (i == rule->premises.size())
                return guards_hold(*rule, theta) &&
                       canonicalize(instantiate(rule->conclusion, theta)) == stated;
            for (const auto& variant :
                 orbit(premise_facts[i].predicate, premise_facts[i].args)) {
                std::vector<std::string> bound_here;
                if (unify_args(rule->premises[i], variant, theta, bound_here) &&
                    search(i + 1, theta))
                    return true;
                for (const auto& v : bound_here) theta.erase(v);
            }
            return false;
        };
        Subst theta;
        try {
            matched = search(0, theta);
        } catch (const std::exception& e) {
            return {false, where + ": " + e.what()};
        }
        if (!matched)
            return {false, where + ": not a correct instance of rule '" + step.label + "'"};
    }
    if (steps.back().fact != goal) return {false, "final step is not the goal"};
    return {true, ""};
}

}  // namespace ogp::ddfa
