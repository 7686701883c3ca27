// Competition runner: ogp-gasc <config.json> [--jobs N] [--markdown]

#include <cstdlib>
#include <iostream>

#include "ogp/gasc.hpp"

int main(int argc, char** argv) {
    std::string config_path;
    int jobs = 1;
    ogp::gasc::TableFormat format = ogp::gasc::TableFormat::Csv;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--jobs" && i + 1 < argc) {
            jobs = std::stoi(argv[++i]);
        } else if (arg == "--markdown") {
            format = ogp::gasc::TableFormat::Markdown;
        } else if (!arg.empty() && arg[0] == '-') {
            std::cerr << "error: unknown option '" << arg << "'\n";
            return 1;
        } else if (config_path.empty()) {
            config_path = arg;
        } else {
            std::cerr << "error: more than one config file\n";
            return 1;
        }
    }
    if (config_path.empty()) {
        std::cerr << "usage: ogp-gasc <config.json> [--jobs N] [--markdown]\n";
        return 1;
    }
    try {
        auto config = ogp::gasc::load_config(config_path);
        ogp::runtime::Registry registry = std::getenv("OGP_PROVERS")
                                              ? ogp::runtime::Registry::load(
                                                    std::getenv("OGP_PROVERS"))
                                              : ogp::runtime::Registry::builtin();
        auto matrix = ogp::gasc::run_competition(config, registry, jobs);
        auto table = ogp::gasc::score(matrix);
        ogp::gasc::emit(table, matrix, format, config.output_dir);
        for (const auto& row : table)
            std::cout << row.rank << ". " << row.prover << "  solved " << row.solved << " in "
                      << row.total_time_ms << " ms\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
