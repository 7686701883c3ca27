#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "ogp/cli.hpp"
#include "ogp/repo.hpp"

using namespace ogp;
using namespace ogp::cli;
namespace fs = std::filesystem;

namespace {

struct CmdResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

CmdResult run_cmd(const std::string& args) {
    std::string cmd = testutil::bin_dir() + "/ogp " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe);
    CmdResult r;
    char buf[4096];
    size_t n;
    while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) r.output.append(buf, n);
    int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

Action parse(std::vector<std::string> args) { return dispatch(args); }

}  // namespace

TEST_CASE("dispatch: documented examples") {
    auto a1 = parse({"ceva.gcl"});
    CHECK(a1.kind == Action::Kind::Prove);
    CHECK(a1.prove.file == "ceva.gcl");
    CHECK_FALSE(a1.prove.prover.has_value());
    CHECK(a1.prove.timeout_ms == 60000);
    CHECK_FALSE(a1.prove.from_repo);

    auto a2 = parse({"-t", "30", "ceva.fof"});
    CHECK(a2.prove.timeout_ms == 30000);
    CHECK(a2.prove.file == "ceva.fof");

    auto a3 = parse({"--tgtp=GEO0001", "gclc"});
    CHECK(a3.prove.from_repo);
    CHECK(a3.prove.tgtp_id == "GEO0001");
    CHECK(a3.prove.prover == "gclc");

    auto a4 = parse({"ceva.gcl", "-w"});
    CHECK(a4.prove.file == "ceva.gcl");
    CHECK_FALSE(a4.prove.prover.has_value());
    CHECK(a4.prove.prover_options == std::vector<std::string>{"-w"});

    CHECK_THROWS_AS(parse({"-h", "ceva.gcl"}), UsageError);
}

TEST_CASE("dispatch: standalone flags, prover options, errors") {
    CHECK(parse({"-h"}).kind == Action::Kind::Help);
    CHECK(parse({"--help"}).kind == Action::Kind::Help);
    CHECK(parse({"-p"}).kind == Action::Kind::ListProvers);
    CHECK(parse({"-V"}).kind == Action::Kind::Version);
    CHECK_THROWS_AS(parse({"-p", "-V"}), UsageError);
    CHECK_THROWS_AS(parse({"-p", "ceva.gcl"}), UsageError);
    // After the conjecture, "-p" is a prover option, not the standalone flag.
    CHECK(parse({"ceva.gcl", "-p"}).prove.prover_options ==
          std::vector<std::string>{"-p"});

    // Everything after the prover is forwarded verbatim.
    auto a = parse({"--timeout=5", "ceva.fof", "vampire", "--mode", "casc", "-t", "9"});
    CHECK(a.prove.timeout_ms == 5000);
    CHECK(a.prove.prover == "vampire");
    CHECK(a.prove.prover_options ==
          std::vector<std::string>{"--mode", "casc", "-t", "9"});

    // Option-looking tokens after the conjecture lock the prover choice.
    auto b = parse({"ceva.gcl", "-w", "sometoken"});
    CHECK_FALSE(b.prove.prover.has_value());
    CHECK(b.prove.prover_options == std::vector<std::string>{"-w", "sometoken"});

    auto c = parse({"--parallel", "--json", "x.fof"});
    CHECK(c.prove.parallel);
    CHECK(c.prove.json_output);

    CHECK_THROWS_AS(parse({}), UsageError);
    CHECK_THROWS_AS(parse({"--frobnicate"}), UsageError);
    CHECK_THROWS_AS(parse({"-t", "abc", "x.fof"}), UsageError);
    CHECK_THROWS_AS(parse({"-t", "0", "x.fof"}), UsageError);
    CHECK_THROWS_AS(parse({"-t", "-5", "x.fof"}), UsageError);
    CHECK_THROWS_AS(parse({"-t"}), UsageError);
    CHECK_THROWS_AS(parse({"--tgtp="}), UsageError);
    CHECK_THROWS_AS(parse({"--tgtp=GEO0001", "--tgtp=GEO0002"}), UsageError);

    // Repository source without a prover goes to the portfolio.
    auto d = parse({"--tgtp=GEO0001"});
    CHECK(d.prove.from_repo);
    CHECK_FALSE(d.prove.prover.has_value());
}

TEST_CASE("choose_prover: the full decision table") {
    auto reg = runtime::Registry::builtin();

    // Explicit prover wins.
    ProveAction explicit_p;
    explicit_p.file = "x.fof";
    explicit_p.prover = "ddfa";
    CHECK(choose_prover(explicit_p, reg).prover == "ddfa");
    explicit_p.prover = "nosuch";
    CHECK_THROWS_AS(choose_prover(explicit_p, reg), UsageError);

    // Local .fof goes to the portfolio.
    ProveAction fof;
    fof.file = "varignon.fof";
    CHECK(choose_prover(fof, reg).use_portfolio);

    // Known extension uses its registry default.
    for (const char* file : {"varignon.gcl", "varignon.jgex", "varignon.ggb.xml"}) {
        ProveAction a;
        a.file = file;
        auto choice = choose_prover(a, reg);
        CHECK_FALSE(choice.use_portfolio);
        CHECK(choice.prover == "ddfa");
    }

    // Repository source without a prover: portfolio.
    ProveAction repo_src;
    repo_src.from_repo = true;
    repo_src.tgtp_id = "GEO0001";
    CHECK(choose_prover(repo_src, reg).use_portfolio);

    // Unknown extension and extension without a default are errors.
    ProveAction unknown;
    unknown.file = "varignon.xyz";
    CHECK_THROWS_AS(choose_prover(unknown, reg), UsageError);
    ProveAction coqam;
    coqam.file = "x.coqam";
    CHECK_THROWS_AS(choose_prover(coqam, reg), UsageError);
}

TEST_CASE("exit codes are a pure function of status") {
    CHECK(exit_code_for(Status::Proved) == 0);
    CHECK(exit_code_for(Status::Disproved) == 1);
    CHECK(exit_code_for(Status::Unknown) == 2);
    CHECK(exit_code_for(Status::Timeout) == 3);
    CHECK(exit_code_for(Status::ResourceOut) == 3);
    CHECK(exit_code_for(Status::Error) == 4);
}

TEST_CASE("ogp binary: proves the fixtures end to end") {
    setenv("OGP_INCLUDE_PATH", testutil::fixture_dir().c_str(), 1);

    auto gcl = run_cmd(testutil::fixture("varignon.gcl"));
    CHECK(gcl.exit_code == 0);
    CHECK(gcl.output.find("ddfa") != std::string::npos);
    CHECK(gcl.output.find("Proved") != std::string::npos);

    auto fof = run_cmd(testutil::fixture("varignon.fof"));
    CHECK(fof.exit_code == 0);

    auto unknown = run_cmd(testutil::fixture("unknown.fof"));
    CHECK(unknown.exit_code == 2);

    auto json_out = run_cmd("--json " + testutil::fixture("varignon.fof"));
    CHECK(json_out.exit_code == 0);
    auto j = nlohmann::json::parse(json_out.output);
    CHECK(j["status"] == "Proved");

    unsetenv("OGP_INCLUDE_PATH");
}

TEST_CASE("ogp binary: external stub statuses map to exit codes") {
    auto dir = testutil::scratch_dir("cli-reg");
    std::string stub = testutil::fixture("stubs/szs_prover.sh");
    testutil::spit(dir + "/provers.json", R"({"provers":[
        {"name":"stub","formats":["fof"],"exec":")" + stub + R"(","post":"szs"},
        {"name":"sleeper","formats":["fof"],
         "exec":")" + testutil::fixture("stubs/sleeper.sh") + R"(","post":"szs"}
    ]})");
    setenv("OGP_PROVERS", (dir + "/provers.json").c_str(), 1);

    setenv("OGP_STUB_STATUS", "CounterSatisfiable", 1);
    CHECK(run_cmd(testutil::fixture("varignon.fof") + " stub").exit_code == 1);
    setenv("OGP_STUB_STATUS", "GaveUp", 1);
    CHECK(run_cmd(testutil::fixture("varignon.fof") + " stub").exit_code == 2);
    unsetenv("OGP_STUB_STATUS");

    auto t0 = std::chrono::steady_clock::now();
    auto timeout = run_cmd("-t 1 " + testutil::fixture("varignon.fof") + " sleeper");
    auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    CHECK(timeout.exit_code == 3);
    CHECK(wall < 3000);

    unsetenv("OGP_PROVERS");
    fs::remove_all(dir);
}

TEST_CASE("ogp binary: usage and IO errors exit 4") {
    CHECK(run_cmd("").exit_code == 4);
    CHECK(run_cmd("--frobnicate").exit_code == 4);
    CHECK(run_cmd("no-such-file.gcl").exit_code == 4);
    CHECK(run_cmd("conjecture.xyz").exit_code == 4);
    auto r = run_cmd("-t abc x.fof");
    CHECK(r.exit_code == 4);
    CHECK(r.output.find("error:") != std::string::npos);
}

TEST_CASE("ogp binary: repository flow against a live fixture server") {
    repo::Server server(repo::Store::open(testutil::fixture("repo_store")), "127.0.0.1", 0);
    setenv("OGP_TGTP_ENDPOINT", ("127.0.0.1:" + std::to_string(server.port())).c_str(), 1);
    setenv("OGP_INCLUDE_PATH", testutil::fixture_dir().c_str(), 1);

    auto ok = run_cmd("--tgtp=GEO0001");
    CHECK(ok.exit_code == 0);

    auto named = run_cmd("--tgtp=GEO0001 ddfa");
    CHECK(named.exit_code == 0);

    auto missing = run_cmd("--tgtp=GEO9999 ddfa");
    CHECK(missing.exit_code == 4);
    CHECK(missing.output.find("not_found") != std::string::npos);

    unsetenv("OGP_TGTP_ENDPOINT");
    unsetenv("OGP_INCLUDE_PATH");
}

TEST_CASE("-p, -V, -h do no network work (unreachable endpoint)") {
    setenv("OGP_TGTP_ENDPOINT", "127.0.0.1:1", 1);
    auto t0 = std::chrono::steady_clock::now();

    auto provers = run_cmd("-p");
    CHECK(provers.exit_code == 0);
    CHECK(provers.output.find("ddfa") != std::string::npos);
    CHECK(provers.output.find("native") != std::string::npos);

    auto version = run_cmd("-V");
    CHECK(version.exit_code == 0);
    CHECK(version.output.find("ogp 0.1.0") != std::string::npos);

    auto help = run_cmd("-h");
    CHECK(help.exit_code == 0);
    CHECK(help.output.find("usage: ogp") != std::string::npos);

    auto wall = std::chrono::duration_cast<std::chrono::milliseconds>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
    CHECK(wall < 2000);
    unsetenv("OGP_TGTP_ENDPOINT");
}
