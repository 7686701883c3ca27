#include "ogp/filters.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

namespace ogp::filters {

using conjecture::GeoConjecture;
using conjecture::GoalPredicate;
using conjecture::StepKind;
using fof::Formula;
using fof::Term;

namespace {

std::string lower_constant(const std::string& label,
                           std::map<std::string, std::string>& seen_from) {
    std::string low = label;
    std::transform(low.begin(), low.end(), low.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    if (low.empty() || !std::islower(static_cast<unsigned char>(low[0])))
        throw std::runtime_error("point label '" + label +
                                 "' does not lowercase to a constant symbol");
    auto [it, fresh] = seen_from.emplace(low, label);
    if (!fresh && it->second != label)
        throw std::runtime_error("point labels '" + it->second + "' and '" + label +
                                 "' collide after lowercasing");
    return low;
}

std::string fof_goal_predicate(GoalPredicate p) {
    switch (p) {
        case GoalPredicate::Collinear: return "coll";
        case GoalPredicate::Parallel: return "para";
        case GoalPredicate::Perpendicular: return "perp";
        case GoalPredicate::Congruent: return "cong";
        case GoalPredicate::Midpoint: return "midp";
        case GoalPredicate::EqAngle: return "eqangle";
        case GoalPredicate::Cyclic: return "cyclic";
    }
    return "?";
}

Formula atom(const std::string& pred, const std::vector<std::string>& consts) {
    std::vector<Term> args;
    args.reserve(consts.size());
    for (const auto& c : consts) args.push_back(Term::constant(c));
    return Formula::atom(pred, std::move(args));
}

}  // namespace

fof::FofDocument conjecture_to_fof(const GeoConjecture& c, const std::string& axiom_include) {
    fof::FofDocument doc;
    doc.includes.push_back(axiom_include);

    std::map<std::string, std::string> seen_from;
    auto lc = [&](const std::string& label) { return lower_constant(label, seen_from); };
    // Lowercase every declared point up front so collisions are caught
    // even for points that emit no atom.
    for (const auto& p : c.points) lc(p);

    int n = 0;
    auto emit = [&](Formula f) {
        doc.formulas.push_back(
            {"h" + std::to_string(++n), fof::Role::Hypothesis, std::move(f), {}});
    };
    for (const auto& step : c.steps) {
        const auto& in = step.inputs;
        switch (step.kind) {
            case StepKind::FreePoint:
                break;
            case StepKind::Midpoint:
                emit(atom("midp", {lc(step.output), lc(in[0]), lc(in[1])}));
                break;
            case StepKind::Foot:
                // F is the foot of the perpendicular from P to line AB.
                emit(atom("perp", {lc(in[0]), lc(step.output), lc(in[1]), lc(in[2])}));
                emit(atom("coll", {lc(step.output), lc(in[1]), lc(in[2])}));
                break;
            case StepKind::IntersectLines:
                emit(atom("coll", {lc(step.output), lc(in[0]), lc(in[1])}));
                emit(atom("coll", {lc(step.output), lc(in[2]), lc(in[3])}));
                break;
            case StepKind::CircleCenter3:
                emit(atom("circle", {lc(step.output), lc(in[0]), lc(in[1]), lc(in[2])}));
                break;
        }
    }
    std::vector<std::string> goal_args;
    for (const auto& a : c.goal.args) goal_args.push_back(lc(a));
    doc.formulas.push_back(
        {"goal", fof::Role::Conjecture, atom(fof_goal_predicate(c.goal.predicate), goal_args),
         {}});
    return doc;
}

int filter_cli(Dialect dialect, std::istream& in, std::ostream& out, std::ostream& err,
               const std::string& axiom_include) {
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        GeoConjecture c;
        switch (dialect) {
            case Dialect::Gcl: c = conjecture::parse_gcl(buf.str()); break;
            case Dialect::Jgex: c = conjecture::parse_jgex(buf.str()); break;
            case Dialect::Geogebra: c = conjecture::parse_ggb_xml(buf.str()); break;
        }
        out << fof::print_fof(conjecture_to_fof(c, axiom_include));
        return 0;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

int filter_main(Dialect dialect, int argc, char** argv) {
    std::string axioms = kDefaultAxiomInclude;
    std::string input_path, output_path;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--axioms") {
            if (++i >= argc) {
                std::cerr << "error: --axioms expects a path\n";
                return 1;
            }
            axioms = argv[i];
        } else if (arg == "-o") {
            if (++i >= argc) {
                std::cerr << "error: -o expects a path\n";
                return 1;
            }
            output_path = argv[i];
        } else if (arg == "-h" || arg == "--help") {
            std::cout << "usage: " << argv[0]
                      << " [input-file] [-o output-file] [--axioms path]\n";
            return 0;
        } else if (!arg.empty() && arg[0] == '-') {
            std::cerr << "error: unknown option '" << arg << "'\n";
            return 1;
        } else if (input_path.empty()) {
            input_path = arg;
        } else {
            std::cerr << "error: more than one input file\n";
            return 1;
        }
    }
    std::ifstream file_in;
    if (!input_path.empty()) {
        file_in.open(input_path);
        if (!file_in) {
            std::cerr << "error: cannot open '" << input_path << "'\n";
            return 1;
        }
    }
    std::istream& in = input_path.empty() ? std::cin : file_in;
    if (output_path.empty()) return filter_cli(dialect, in, std::cout, std::cerr, axioms);
    // Buffer so a failed run leaves no partial output file.
    std::ostringstream buffer;
    int rc = filter_cli(dialect, in, buffer, std::cerr, axioms);
    if (rc == 0) {
        std::ofstream out(output_path);
        if (!out) {
            std::cerr << "error: cannot write '" << output_path << "'\n";
            return 1;
        }
        out << buffer.str();
    }
    return rc;
}

}  // namespace ogp::filters
