#ifndef OGP_CLI_HPP
#define OGP_CLI_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ogp/runtime.hpp"

namespace ogp::cli {

class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct ProveAction {
    bool from_repo = false;
    std::string file;     // local source
    std::string tgtp_id;  // repository source
    std::optional<std::string> prover;
    std::vector<std::string> prover_options;
    std::int64_t timeout_ms = 60000;  // default time limit
    bool parallel = false;
    bool json_output = false;
};

struct Action {
    enum class Kind { Help, ListProvers, Version, Prove };
    Kind kind = Kind::Help;
    ProveAction prove;
};

// `ogp [<option>] [<conjecture> [<prover> [<prover-options>]]]`.
// -h/-p/-V are standalone. After the conjecture, the first bare word
// names the prover; everything else is forwarded verbatim.
Action dispatch(const std::vector<std::string>& args);

struct ProverChoice {
    bool use_portfolio = false;
    std::string prover;  // when not portfolio
};

// Explicit prover wins; a local `.fof` file and any repository source
// without a prover go to the portfolio; other known extensions use the
// registry's extension default.
ProverChoice choose_prover(const ProveAction& action, const runtime::Registry& registry);

// Exit codes: 0 Proved, 1 Disproved, 2 Unknown, 3 Timeout/ResourceOut,
// 4 usage/IO/format error.
int exit_code_for(Status status);

// Full driver behind the `ogp` executable.
int main_impl(int argc, char** argv);

}  // namespace ogp::cli

#endif
