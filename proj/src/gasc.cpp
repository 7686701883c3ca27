#include "ogp/gasc.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "ogp/repo.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ogp::gasc {

using runtime::Format;
using runtime::RunReport;

CompetitionConfig config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed competition config: ") + e.what());
    }
    CompetitionConfig c;
    try {
        for (const auto& p : j.at("provers")) c.provers.push_back(p.get<std::string>());
        for (const auto& p : j.at("problems")) c.problems.push_back(p.get<std::string>());
        c.per_problem_timeout_ms = j.value("per_problem_timeout_ms", std::int64_t{60000});
        c.output_dir = j.at("output_dir").get<std::string>();
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("competition config: ") + e.what());
    }
    if (c.provers.empty()) throw std::runtime_error("competition config: no provers");
    if (c.problems.empty()) throw std::runtime_error("competition config: no problems");
    if (c.per_problem_timeout_ms <= 0)
        throw std::runtime_error("competition config: timeout must be positive");
    return c;
}

CompetitionConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return config_from_json(buf.str());
}

namespace {

Format format_of_path(const std::string& path) {
    std::string p = path;
    for (const char* ext : {".ggb.xml", ".fof", ".ax", ".gcl", ".jgex", ".coqam"}) {
        if (p.size() >= std::strlen(ext) &&
            p.compare(p.size() - std::strlen(ext), std::string::npos, ext) == 0) {
            return *runtime::format_from_extension(ext);
        }
    }
    throw std::runtime_error("problem '" + path + "' has no recognized extension");
}

std::string sanitize(const std::string& s) {
    std::string out;
    for (char c : s) out += (std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
    return out;
}

}  // namespace

ResultMatrix run_competition(const CompetitionConfig& config,
                             const runtime::Registry& registry, int jobs) {
    // Fail fast before any run.
    for (const auto& name : config.provers)
        if (!registry.find(name))
            throw std::runtime_error("prover '" + name + "' is not registered");

    struct Problem {
        std::string label;
        std::string file;
        Format format;
    };
    std::vector<Problem> problems;
    for (const auto& p : config.problems) {
        if (repo::valid_problem_id(p)) {
            const char* endpoint = std::getenv("OGP_TGTP_ENDPOINT");
            if (!endpoint)
                throw std::runtime_error("problem '" + p +
                                         "' is a repository id but OGP_TGTP_ENDPOINT is unset");
            auto [format, content] = repo::client_get(endpoint, p, "fof", 10000);
            std::string file =
                runtime::make_temp_file(runtime::extension_for_format(
                    *runtime::format_from_name(format)));
            std::ofstream out(file, std::ios::binary);
            out << content;
            problems.push_back({p, file, *runtime::format_from_name(format)});
        } else {
            if (!fs::exists(p)) throw std::runtime_error("problem file '" + p + "' not found");
            problems.push_back({p, p, format_of_path(p)});
        }
    }

    fs::create_directories(fs::path(config.output_dir) / "raw");

    ResultMatrix matrix;
    matrix.provers = config.provers;
    for (const auto& p : problems) matrix.problems.push_back(p.label);
    matrix.cells.resize(config.provers.size() * problems.size());

    auto run_cell = [&](size_t pi, size_t qi) {
        const auto* spec = registry.find(config.provers[pi]);
        RunReport report = runtime::run(*spec, problems[qi].file, problems[qi].format,
                                        config.per_problem_timeout_ms);
        fs::path raw = fs::path(config.output_dir) / "raw" /
                       (sanitize(config.provers[pi]) + "__" +
                        sanitize(fs::path(problems[qi].label).filename().string()) + ".txt");
        std::ofstream out(raw);
        out << runtime::report_to_json(report) << "\n";
        matrix.cells[pi * problems.size() + qi] = std::move(report);
    };

    if (jobs <= 1) {
        for (size_t pi = 0; pi < config.provers.size(); ++pi)
            for (size_t qi = 0; qi < problems.size(); ++qi) run_cell(pi, qi);
    } else {
        std::atomic<size_t> next{0};
        size_t total = config.provers.size() * problems.size();
        std::vector<std::thread> threads;
        for (int t = 0; t < jobs; ++t)
            threads.emplace_back([&] {
                for (size_t i = next.fetch_add(1); i < total; i = next.fetch_add(1))
                    run_cell(i / problems.size(), i % problems.size());
            });
        for (auto& t : threads) t.join();
    }
    return matrix;
}

std::vector<ScoreRow> score(const ResultMatrix& matrix) {
    std::vector<ScoreRow> rows;
    for (size_t pi = 0; pi < matrix.provers.size(); ++pi) {
        ScoreRow row;
        row.prover = matrix.provers[pi];
        for (size_t qi = 0; qi < matrix.problems.size(); ++qi) {
            const auto& cell = matrix.cell(pi, qi);
            if (cell.status == Status::Proved || cell.status == Status::Disproved) {
                ++row.solved;
                row.total_time_ms += cell.time_ms;
            }
        }
        rows.push_back(std::move(row));
    }
    auto better = [](const ScoreRow& a, const ScoreRow& b) {
        if (a.solved != b.solved) return a.solved > b.solved;
        return a.total_time_ms < b.total_time_ms;
    };
    for (auto& row : rows) {
        row.rank = 1;
        for (const auto& other : rows)
            if (better(other, row)) ++row.rank;
    }
    std::stable_sort(rows.begin(), rows.end(), [&](const ScoreRow& a, const ScoreRow& b) {
        return a.rank < b.rank;
    });
    return rows;
}

void emit(const std::vector<ScoreRow>& table, const ResultMatrix& matrix, TableFormat format,
          const std::string& output_dir) {
    fs::create_directories(output_dir);
    {
        std::ofstream csv(fs::path(output_dir) / "results.csv", std::ios::binary);
        if (!csv) throw std::runtime_error("cannot write to '" + output_dir + "'");
        csv << "prover,problem,status,time_ms\n";
        for (size_t pi = 0; pi < matrix.provers.size(); ++pi)
            for (size_t qi = 0; qi < matrix.problems.size(); ++qi) {
                const auto& cell = matrix.cell(pi, qi);
                csv << matrix.provers[pi] << "," << matrix.problems[qi] << ","
                    << status_name(cell.status) << "," << cell.time_ms << "\n";
            }
    }
    if (format == TableFormat::Csv) {
        std::ofstream out(fs::path(output_dir) / "scores.csv", std::ios::binary);
        out << "rank,prover,solved,total_time_ms\n";
        for (const auto& row : table)
            out << row.rank << "," << row.prover << "," << row.solved << ","
                << row.total_time_ms << "\n";
    } else {
        std::ofstream out(fs::path(output_dir) / "scores.md", std::ios::binary);
        out << "| rank | prover | solved | total time (ms) |\n";
        out << "|------|--------|--------|-----------------|\n";
        for (const auto& row : table)
            out << "| " << row.rank << " | " << row.prover << " | " << row.solved << " | "
                << row.total_time_ms << " |\n";
    }
}

}  // namespace ogp::gasc
