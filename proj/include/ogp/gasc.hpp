#ifndef OGP_GASC_HPP
#define OGP_GASC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "ogp/runtime.hpp"

namespace ogp::gasc {

struct CompetitionConfig {
    std::vector<std::string> provers;
    std::vector<std::string> problems;  // file paths or GEO#### repository ids
    std::int64_t per_problem_timeout_ms = 60000;
    std::string output_dir;
};

CompetitionConfig config_from_json(const std::string& json_text);
CompetitionConfig load_config(const std::string& path);

// Complete (prover x problem) grid, prover-major.
struct ResultMatrix {
    std::vector<std::string> provers;
    std::vector<std::string> problems;
    std::vector<runtime::RunReport> cells;  // provers.size() * problems.size()

    const runtime::RunReport& cell(size_t prover_idx, size_t problem_idx) const {
        return cells[prover_idx * problems.size() + problem_idx];
    }
};

// Runs every pair under the configured timeout, prover-major and
// deterministic; raw outputs are archived under output_dir/raw. Fails
// fast (before any run) on unregistered provers or unreadable problems.
// jobs > 1 runs that many cells concurrently (documented as altering
// timing comparability).
ResultMatrix run_competition(const CompetitionConfig& config,
                             const runtime::Registry& registry, int jobs = 1);

struct ScoreRow {
    std::string prover;
    size_t solved = 0;             // Proved + Disproved cells
    std::int64_t total_time_ms = 0;  // over solved cells
    size_t rank = 0;               // ties share a rank
};

std::vector<ScoreRow> score(const ResultMatrix& matrix);

enum class TableFormat { Csv, Markdown };

// Writes results.csv (one row per cell) and scores.csv / scores.md;
// byte-deterministic for a given matrix.
void emit(const std::vector<ScoreRow>& table, const ResultMatrix& matrix, TableFormat format,
          const std::string& output_dir);

}  // namespace ogp::gasc

#endif
