#ifndef OGP_REPO_HPP
#define OGP_REPO_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace ogp::repo {

// A problem id looks like GEO0001.
bool valid_problem_id(const std::string& id);

struct ProblemRecord {
    std::string id;
    std::string title;
    std::vector<std::string> formats;  // "fof" always present
    std::string created;
    std::string modified;
};

class NotFoundError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Filesystem-backed store: `manifest.json` plus
// `problems/<ID>/meta.json` and one `problem.<ext>` per stored format.
class Store {
public:
    // Loads and validates the manifest; creates the layout when the
    // directory is empty or missing.
    static Store open(const std::string& root);

    std::vector<std::string> list() const;
    const ProblemRecord* record(const std::string& id) const;

    // Exact format when stored, FOF content otherwise. Bytes preserved.
    std::pair<std::string, std::string> get(const std::string& id,
                                            const std::string& format) const;

    // Copies the given files (format name -> source path) into the record
    // layout after parsing each with its frontend; rewrites the manifest
    // atomically. `pre_commit_hook`, when set, runs after the files are
    // copied and before the manifest is replaced (failure-injection point
    // for tests).
    void ingest(const std::string& id, const std::string& title,
                const std::map<std::string, std::string>& files, bool overwrite = false,
                const std::function<void()>& pre_commit_hook = nullptr);

    const std::string& root() const { return root_; }

private:
    std::string root_;
    std::map<std::string, ProblemRecord> records_;
};

// Always-listening query server: one newline-terminated JSON request per
// connection, one newline-terminated JSON response. Malformed requests
// get a bad_request response, never a dropped connection.
class Server {
public:
    // Binds immediately (port 0 picks a free port) and serves until
    // destruction or stop().
    Server(Store store, const std::string& bind_address, int port);
    ~Server();

    int port() const;
    void stop();

    Server(const Server&) = delete;
    Server& operator=(const Server&) = delete;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class RemoteError : public std::runtime_error {
public:
    RemoteError(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

private:
    std::string code_;
};

// One get round trip against `host:port`. Returns (actual format,
// content); the fallback to FOF is visible to the caller. Connection
// failures raise TransportError; server-side errors raise RemoteError.
std::pair<std::string, std::string> client_get(const std::string& endpoint,
                                               const std::string& id,
                                               const std::string& format,
                                               std::int64_t timeout_ms);

// List round trip.
std::vector<std::string> client_list(const std::string& endpoint, std::int64_t timeout_ms);

// Raw round trip (exposed for protocol tests): sends one line, returns
// the response line.
std::string client_roundtrip(const std::string& endpoint, const std::string& request_line,
                             std::int64_t timeout_ms);

}  // namespace ogp::repo

#endif
