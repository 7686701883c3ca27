// Standalone native prover obeying the shared native contract:
//   ogp-ddfa <input.fof> [--timeout <s>] [--proof <path>]
// One JSON report object on stdout, human-readable text on stderr.

#include <fstream>
#include <iostream>
#include <sstream>

#include "ogp/cli.hpp"
#include "ogp/ddfa.hpp"
#include "ogp/runtime.hpp"

int main(int argc, char** argv) {
    std::string input;
    std::string proof_path;
    std::int64_t timeout_ms = 60000;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--timeout") {
            if (++i >= argc) {
                std::cerr << "error: --timeout expects seconds\n";
                return 4;
            }
            timeout_ms = std::stoll(argv[i]) * 1000;
        } else if (arg == "--proof") {
            if (++i >= argc) {
                std::cerr << "error: --proof expects a path\n";
                return 4;
            }
            proof_path = argv[i];
        } else if (!arg.empty() && arg[0] == '-') {
            std::cerr << "error: unknown option '" << arg << "'\n";
            return 4;
        } else if (input.empty()) {
            input = arg;
        } else {
            std::cerr << "error: more than one input file\n";
            return 4;
        }
    }
    if (input.empty()) {
        std::cerr << "usage: ogp-ddfa <input.fof> [--timeout <s>] [--proof <path>]\n";
        return 4;
    }

    ogp::runtime::RunReport report;
    report.prover = "ddfa";
    try {
        std::ifstream in(input);
        if (!in) throw std::runtime_error("cannot open '" + input + "'");
        std::stringstream buf;
        buf << in.rdbuf();
        auto doc = ogp::fof::parse_fof(buf.str());
        doc = ogp::fof::resolve_includes(doc, ogp::runtime::include_search_paths(input));
        ogp::ddfa::SaturationLimits limits;
        limits.timeout_ms = timeout_ms;
        auto result = ogp::ddfa::prove(doc, limits);
        report.status = result.status;
        report.time_ms = result.time_ms;
        report.detail = result.detail;
        if (result.status == ogp::Status::Proved) {
            if (proof_path.empty()) proof_path = ogp::runtime::make_temp_file(".proof");
            std::ofstream out(proof_path);
            out << result.proof;
            report.proof_path = proof_path;
        }
    } catch (const std::exception& e) {
        report.status = ogp::Status::Error;
        report.detail = e.what();
    }
    std::cout << ogp::runtime::report_to_json(report) << "\n";
    std::cerr << ogp::status_name(report.status) << " in " << report.time_ms << " ms\n";
    return ogp::cli::exit_code_for(report.status);
}
