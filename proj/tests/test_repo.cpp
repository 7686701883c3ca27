#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <filesystem>
#include <random>
#include <thread>

#include "doctest.h"
#include "helpers.hpp"
#include "json.hpp"
#include "ogp/repo.hpp"

using namespace ogp::repo;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string store_root() { return testutil::fixture("repo_store"); }

std::string endpoint(const Server& s) { return "127.0.0.1:" + std::to_string(s.port()); }

// A private writable copy of the fixture store.
std::string writable_store(const std::string& tag) {
    auto dst = testutil::scratch_dir("repo-" + tag) + "/store";
    fs::copy(store_root(), dst, fs::copy_options::recursive);
    return dst;
}

}  // namespace

TEST_CASE("problem id validation") {
    CHECK(valid_problem_id("GEO0001"));
    CHECK(valid_problem_id("GEO9999"));
    CHECK_FALSE(valid_problem_id("GEO001"));
    CHECK_FALSE(valid_problem_id("geo0001"));
    CHECK_FALSE(valid_problem_id("GEO00001"));
    CHECK_FALSE(valid_problem_id("TPTP001"));
    CHECK_FALSE(valid_problem_id(""));
}

TEST_CASE("store: open, list, records") {
    auto store = Store::open(store_root());
    CHECK(store.list() == std::vector<std::string>{"GEO0001", "GEO0002", "GEO0003"});
    const auto* r = store.record("GEO0001");
    REQUIRE(r);
    CHECK(r->title == "Varignon parallelogram");
    CHECK(r->formats == std::vector<std::string>{"fof", "gcl"});
    CHECK(store.record("GEO0009") == nullptr);
}

TEST_CASE("store: exact format hit and fof fallback, bytes preserved") {
    auto store = Store::open(store_root());
    auto [f1, c1] = store.get("GEO0001", "gcl");
    CHECK(f1 == "gcl");
    CHECK(c1 == testutil::slurp(store_root() + "/problems/GEO0001/problem.gcl"));

    auto [f2, c2] = store.get("GEO0001", "jgex");  // not stored -> fof fallback
    CHECK(f2 == "fof");
    CHECK(c2 == testutil::slurp(store_root() + "/problems/GEO0001/problem.fof"));

    CHECK_THROWS_AS(store.get("GEO0042", "fof"), NotFoundError);
}

TEST_CASE("store: open validates the layout") {
    auto dir = testutil::scratch_dir("repo-corrupt");
    // Fresh empty directory is fine.
    CHECK_NOTHROW(Store::open(dir + "/fresh"));
    // Manifest naming a record without meta.json is rejected.
    fs::create_directories(dir + "/bad");
    testutil::spit(dir + "/bad/manifest.json", R"({"problems":["GEO0001"]})");
    CHECK_THROWS(Store::open(dir + "/bad"));
    // Corrupt manifest JSON is rejected.
    fs::create_directories(dir + "/bad2");
    testutil::spit(dir + "/bad2/manifest.json", "{nope");
    CHECK_THROWS(Store::open(dir + "/bad2"));
    fs::remove_all(dir);
}

TEST_CASE("store: ingest validates, requires fof, and is atomic") {
    auto root = writable_store("ingest");
    auto store = Store::open(root);

    std::map<std::string, std::string> files = {
        {"fof", testutil::fixture("midline.fof")},
        {"gcl", testutil::fixture("midline.gcl")},
    };
    store.ingest("GEO0004", "Midline", files);
    auto reopened = Store::open(root);
    CHECK(reopened.list().size() == 4);
    CHECK(reopened.get("GEO0004", "gcl").first == "gcl");

    // Invalid id, duplicate without overwrite, missing fof, unparsable file.
    CHECK_THROWS(store.ingest("GEO04", "bad id", files));
    CHECK_THROWS(store.ingest("GEO0004", "dup", files));
    CHECK_NOTHROW(store.ingest("GEO0004", "dup", files, /*overwrite=*/true));
    CHECK_THROWS(store.ingest("GEO0005", "no fof",
                              {{"gcl", testutil::fixture("midline.gcl")}}));
    CHECK_THROWS(store.ingest("GEO0005", "wrong dialect",
                              {{"fof", testutil::fixture("midline.fof")},
                               {"gcl", testutil::fixture("varignon.jgex")}}));

    // pre_commit_hook failure leaves the manifest (and the visible store)
    // unchanged.
    auto before = testutil::slurp(root + "/manifest.json");
    CHECK_THROWS(store.ingest("GEO0006", "boom",
                              {{"fof", testutil::fixture("midline.fof")}}, false,
                              [] { throw std::runtime_error("injected failure"); }));
    CHECK(testutil::slurp(root + "/manifest.json") == before);
    CHECK(Store::open(root).record("GEO0006") == nullptr);

    fs::remove_all(fs::path(root).parent_path());
}

TEST_CASE("server: end-to-end list and get") {
    Server server(Store::open(store_root()), "127.0.0.1", 0);
    CHECK(server.port() > 0);

    auto ids = client_list(endpoint(server), 2000);
    CHECK(ids == std::vector<std::string>{"GEO0001", "GEO0002", "GEO0003"});

    auto [fmt, content] = client_get(endpoint(server), "GEO0001", "gcl", 2000);
    CHECK(fmt == "gcl");
    CHECK(content == testutil::slurp(store_root() + "/problems/GEO0001/problem.gcl"));

    // Fallback is visible to the caller.
    auto [fb_fmt, fb_content] = client_get(endpoint(server), "GEO0002", "jgex", 2000);
    CHECK(fb_fmt == "fof");
    CHECK(fb_content == testutil::slurp(store_root() + "/problems/GEO0002/problem.fof"));

    // Unknown id -> RemoteError with code not_found.
    try {
        client_get(endpoint(server), "GEO0042", "fof", 2000);
        FAIL_CHECK("expected RemoteError");
    } catch (const RemoteError& e) {
        CHECK(e.code() == "not_found");
    }
    // Unknown format -> bad_request.
    try {
        client_get(endpoint(server), "GEO0001", "pdf", 2000);
        FAIL_CHECK("expected RemoteError");
    } catch (const RemoteError& e) {
        CHECK(e.code() == "bad_request");
    }
}

TEST_CASE("server: malformed requests get a JSON error, never a drop") {
    Server server(Store::open(store_root()), "127.0.0.1", 0);
    for (const char* bad : {"not json", "{}", "[1,2]", "{\"op\":42}",
                            "{\"op\":\"delete\"}", "{\"op\":\"get\"}"}) {
        CAPTURE(bad);
        auto line = client_roundtrip(endpoint(server), bad, 2000);
        auto j = json::parse(line);
        CHECK(j["status"] == "error");
        CHECK(j["code"] == "bad_request");
    }
}

TEST_CASE("server: 1000 fuzzed request lines each get one well-formed response") {
    Server server(Store::open(store_root()), "127.0.0.1", 0);
    std::mt19937 rng(31337);
    const std::string alphabet = "{}[]\":,abcdefgop ltisGEO0123\\n\t";
    for (int i = 0; i < 1000; ++i) {
        std::string req;
        size_t len = rng() % 60;
        for (size_t k = 0; k < len; ++k) req += alphabet[rng() % alphabet.size()];
        std::replace(req.begin(), req.end(), '\n', ' ');
        std::string line;
        REQUIRE_NOTHROW(line = client_roundtrip(endpoint(server), req, 2000));
        json j;
        REQUIRE_NOTHROW(j = json::parse(line));
        CHECK((j["status"] == "ok" || j["status"] == "error"));
    }
}

TEST_CASE("server: 50 concurrent clients receive byte-correct responses") {
    Server server(Store::open(store_root()), "127.0.0.1", 0);
    auto expected = testutil::slurp(store_root() + "/problems/GEO0001/problem.fof");
    std::vector<std::thread> threads;
    std::vector<int> failures(50, 1);
    for (int i = 0; i < 50; ++i)
        threads.emplace_back([&, i] {
            try {
                auto [fmt, content] = client_get(endpoint(server), "GEO0001", "fof", 5000);
                if (fmt == "fof" && content == expected) failures[i] = 0;
            } catch (...) {
            }
        });
    for (auto& t : threads) t.join();
    CHECK(std::count(failures.begin(), failures.end(), 0) == 50);
}

TEST_CASE("client: transport errors are distinct from remote errors") {
    // Nothing listens here (port reserved then closed).
    CHECK_THROWS_AS(client_list("127.0.0.1:1", 300), TransportError);
    CHECK_THROWS_AS(client_get("127.0.0.1:1", "GEO0001", "fof", 300), TransportError);
}

TEST_CASE("server: stop() terminates cleanly and frees the port") {
    auto store = Store::open(store_root());
    int port;
    {
        Server server(std::move(store), "127.0.0.1", 0);
        port = server.port();
        CHECK(client_list("127.0.0.1:" + std::to_string(port), 2000).size() == 3);
        server.stop();
    }
    Server reuse(Store::open(store_root()), "127.0.0.1", port);
    CHECK(reuse.port() == port);
    CHECK(client_list("127.0.0.1:" + std::to_string(port), 2000).size() == 3);
}
