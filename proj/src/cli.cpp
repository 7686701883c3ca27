#include "ogp/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ogp/fof.hpp"
#include "ogp/portfolio.hpp"
#include "ogp/repo.hpp"

namespace fs = std::filesystem;

namespace ogp::cli {

using runtime::Format;
using runtime::Registry;
using runtime::RunReport;

namespace {

constexpr const char* kVersion = "0.1.0";
constexpr const char* kDefaultEndpoint = "localhost:7331";

const char* kUsage =
    "usage: ogp [<option>] [<conjecture> [<prover> [<prover-options>]]]\n"
    "\n"
    "options:\n"
    "  -h, --help            print this message and exit (standalone)\n"
    "  -p, --provers         list the available provers and exit (standalone)\n"
    "  -V, --version         print the version and exit (standalone)\n"
    "  -t <s>, --timeout=<s> time limit in seconds (default 60)\n"
    "  --tgtp=<id>           fetch the conjecture from the repository\n"
    "  --parallel            run portfolio slots concurrently\n"
    "  --json                machine-readable report on stdout\n"
    "\n"
    "environment: OGP_PROVERS (registry file), OGP_POLICY (policy file),\n"
    "             OGP_TGTP_ENDPOINT (host:port), OGP_INCLUDE_PATH\n";

std::int64_t parse_timeout(const std::string& value) {
    if (value.empty() ||
        value.find_first_not_of("0123456789") != std::string::npos)
        throw UsageError("timeout must be a positive integer (seconds)");
    std::int64_t seconds = std::stoll(value);
    if (seconds <= 0) throw UsageError("timeout must be positive");
    return seconds * 1000;
}

// ".ggb.xml" is a double extension; take it whole.
std::string extension_of(const std::string& path) {
    std::string name = fs::path(path).filename().string();
    if (name.size() > 8 && name.compare(name.size() - 8, 8, ".ggb.xml") == 0)
        return ".ggb.xml";
    auto dot = name.rfind('.');
    return dot == std::string::npos ? "" : name.substr(dot);
}

}  // namespace

Action dispatch(const std::vector<std::string>& args) {
    Action action;
    action.kind = Action::Kind::Prove;
    ProveAction& p = action.prove;

    bool standalone_seen = false;
    Action::Kind standalone_kind = Action::Kind::Help;
    bool have_conjecture = false;
    bool have_tgtp = false;
    bool prover_locked = false;  // options started; later bare words are options too

    for (size_t i = 0; i < args.size(); ++i) {
        const std::string& arg = args[i];
        bool after_conjecture = have_conjecture || (have_tgtp && (p.prover || prover_locked));
        if (p.prover || (after_conjecture && prover_locked)) {
            p.prover_options.push_back(arg);
            continue;
        }
        if (have_conjecture && !arg.empty() && arg[0] == '-') {
            prover_locked = true;
            p.prover_options.push_back(arg);
            continue;
        }
        if (!arg.empty() && arg[0] == '-') {
            if (arg == "-h" || arg == "--help") {
                standalone_seen = true;
                standalone_kind = Action::Kind::Help;
            } else if (arg == "-p" || arg == "--provers") {
                standalone_seen = true;
                standalone_kind = Action::Kind::ListProvers;
            } else if (arg == "-V" || arg == "--version") {
                standalone_seen = true;
                standalone_kind = Action::Kind::Version;
            } else if (arg == "-t") {
                if (++i >= args.size()) throw UsageError("-t expects a value");
                p.timeout_ms = parse_timeout(args[i]);
            } else if (arg.rfind("--timeout=", 0) == 0) {
                p.timeout_ms = parse_timeout(arg.substr(10));
            } else if (arg.rfind("--tgtp=", 0) == 0) {
                if (have_tgtp) throw UsageError("--tgtp given twice");
                p.tgtp_id = arg.substr(7);
                if (p.tgtp_id.empty()) throw UsageError("--tgtp expects an id");
                have_tgtp = true;
            } else if (arg == "--parallel") {
                p.parallel = true;
            } else if (arg == "--json") {
                p.json_output = true;
            } else {
                throw UsageError("unknown option '" + arg + "'");
            }
            continue;
        }
        // Bare word: conjecture file first, then the prover.
        if (!have_conjecture && !have_tgtp) {
            p.file = arg;
            have_conjecture = true;
        } else {
            p.prover = arg;
        }
    }

    if (standalone_seen) {
        if (args.size() != 1)
            throw UsageError("-h, -p and -V are to be used alone");
        action.kind = standalone_kind;
        return action;
    }
    if (have_conjecture && have_tgtp)
        throw UsageError("give either a conjecture file or --tgtp, not both");
    if (!have_conjecture && !have_tgtp)
        throw UsageError("no conjecture given (see ogp -h)");
    p.from_repo = have_tgtp;
    return action;
}

ProverChoice choose_prover(const ProveAction& action, const Registry& registry) {
    if (action.prover) {
        if (!registry.find(*action.prover))
            throw UsageError("prover '" + *action.prover + "' is not registered");
        return {false, *action.prover};
    }
    if (action.from_repo) return {true, ""};
    std::string ext = extension_of(action.file);
    if (ext == ".fof") return {true, ""};
    if (const auto* spec = registry.default_for_extension(ext)) return {false, spec->name};
    if (ext.empty()) throw UsageError("'" + action.file + "' has no extension");
    throw UsageError("no default prover for extension '" + ext + "'");
}

int exit_code_for(Status status) {
    switch (status) {
        case Status::Proved: return 0;
        case Status::Disproved: return 1;
        case Status::Unknown: return 2;
        case Status::Timeout:
        case Status::ResourceOut: return 3;
        case Status::Error: return 4;
    }
    return 4;
}

namespace {

Registry load_registry() {
    if (const char* path = std::getenv("OGP_PROVERS")) return Registry::load(path);
    return Registry::builtin();
}

portfolio::PolicyTable load_policy() {
    if (const char* path = std::getenv("OGP_POLICY")) return portfolio::load_policy(path);
    return portfolio::default_policy();
}

void print_report(const RunReport& report, bool json_output) {
    if (json_output) {
        std::cout << runtime::report_to_json(report) << "\n";
        return;
    }
    std::cout << "status: " << status_name(report.status) << "\n";
    std::cout << "prover: " << report.prover << "\n";
    std::cout << "time:   " << report.time_ms << " ms\n";
    if (report.proof_path) std::cout << "proof:  " << *report.proof_path << "\n";
    if (!report.detail.empty()) std::cout << "detail: " << report.detail << "\n";
}

int run_prove(const ProveAction& action) {
    Registry registry = load_registry();
    ProverChoice choice = choose_prover(action, registry);

    std::string file = action.file;
    Format format = Format::Fof;
    if (action.from_repo) {
        const char* endpoint = std::getenv("OGP_TGTP_ENDPOINT");
        if (!endpoint) endpoint = kDefaultEndpoint;
        std::string wanted = "fof";
        if (!choice.use_portfolio) {
            const auto* spec = registry.find(choice.prover);
            wanted = runtime::format_name(spec->accepted_formats.front());
        }
        auto [actual, content] = repo::client_get(endpoint, action.tgtp_id, wanted, 10000);
        // The format actually returned, not the requested one, drives
        // format negotiation.
        format = *runtime::format_from_name(actual);
        file = runtime::make_temp_file(runtime::extension_for_format(format));
        std::ofstream out(file, std::ios::binary);
        out << content;
    } else {
        if (!fs::exists(file)) throw UsageError("file '" + file + "' not found");
        auto fmt = runtime::format_from_extension(extension_of(file));
        if (!fmt) throw UsageError("unrecognized conjecture format '" + extension_of(file) + "'");
        format = *fmt;
    }

    RunReport report;
    if (choice.use_portfolio) {
        if (format != Format::Fof)
            throw UsageError("portfolio expects FOF input, got '" +
                             runtime::format_name(format) + "'");
        std::ifstream in(file);
        std::stringstream buf;
        buf << in.rdbuf();
        fof::FofDocument doc = fof::parse_fof(buf.str());
        // Features come from the problem itself, not the axiom includes.
        doc.includes.clear();
        auto features = portfolio::extract_features(doc);
        auto plan = portfolio::select(features, registry, load_policy(), action.timeout_ms);
        report = portfolio::execute(plan, registry, file, format, action.parallel);
    } else {
        const auto* spec = registry.find(choice.prover);
        report = runtime::run(*spec, file, format, action.timeout_ms, action.prover_options);
    }
    print_report(report, action.json_output);
    if (report.status == Status::Error && !action.json_output)
        std::cerr << "error: " << report.detail << "\n";
    return exit_code_for(report.status);
}

}  // namespace

int main_impl(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        Action action = dispatch(args);
        switch (action.kind) {
            case Action::Kind::Help:
                std::cout << kUsage;
                return 0;
            case Action::Kind::Version:
                std::cout << "ogp " << kVersion << "\n";
                return 0;
            case Action::Kind::ListProvers: {
                Registry registry = load_registry();
                for (const auto& spec : registry.specs()) {
                    std::cout << spec.name << "\t" << (spec.native ? "native" : "external")
                              << "\t";
                    for (size_t i = 0; i < spec.accepted_formats.size(); ++i)
                        std::cout << (i ? "," : "")
                                  << runtime::format_name(spec.accepted_formats[i]);
                    std::cout << "\t";
                    for (size_t i = 0; i < spec.default_for_extensions.size(); ++i)
                        std::cout << (i ? "," : "") << spec.default_for_extensions[i];
                    std::cout << "\n";
                }
                return 0;
            }
            case Action::Kind::Prove:
                return run_prove(action.prove);
        }
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const repo::RemoteError& e) {
        std::cerr << "error: " << e.code() << ": " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
    return 4;
}

}  // namespace ogp::cli
