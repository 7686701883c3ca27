#include "ogp/repo.hpp"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <atomic>
#include <cctype>
#include <chrono>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "ogp/conjecture.hpp"
#include "ogp/fof.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace ogp::repo {

bool valid_problem_id(const std::string& id) {
    if (id.size() != 7 || id.compare(0, 3, "GEO") != 0) return false;
    return std::all_of(id.begin() + 3, id.end(),
                       [](unsigned char c) { return std::isdigit(c); });
}

namespace {

const std::map<std::string, std::string>& format_files() {
    static const std::map<std::string, std::string> m = {
        {"fof", "problem.fof"},
        {"gcl", "problem.gcl"},
        {"jgex", "problem.jgex"},
        {"geogebra", "problem.ggb.xml"},
    };
    return m;
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    out << content;
}

std::string now_iso8601() {
    auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::tm tm{};
    gmtime_r(&t, &tm);
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

ProblemRecord record_from_meta(const json& j) {
    ProblemRecord r;
    r.id = j.at("id").get<std::string>();
    r.title = j.value("title", "");
    for (const auto& f : j.at("formats")) r.formats.push_back(f.get<std::string>());
    r.created = j.value("created", "");
    r.modified = j.value("modified", "");
    return r;
}

json meta_to_json(const ProblemRecord& r) {
    json j;
    j["id"] = r.id;
    j["title"] = r.title;
    j["formats"] = r.formats;
    j["created"] = r.created;
    j["modified"] = r.modified;
    return j;
}

void validate_record(const fs::path& root, const ProblemRecord& r) {
    if (!valid_problem_id(r.id))
        throw std::runtime_error("record '" + r.id + "': invalid problem id");
    bool has_fof = false;
    for (const auto& f : r.formats) {
        auto it = format_files().find(f);
        if (it == format_files().end())
            throw std::runtime_error("record '" + r.id + "': unknown format '" + f + "'");
        if (f == "fof") has_fof = true;
        if (!fs::exists(root / "problems" / r.id / it->second))
            throw std::runtime_error("record '" + r.id + "': missing file for format '" + f +
                                     "'");
    }
    if (!has_fof) throw std::runtime_error("record '" + r.id + "': no fof content");
}

}  // namespace

Store Store::open(const std::string& root) {
    Store store;
    store.root_ = root;
    fs::create_directories(fs::path(root) / "problems");
    fs::path manifest = fs::path(root) / "manifest.json";
    if (!fs::exists(manifest)) return store;
    json j;
    try {
        j = json::parse(read_file(manifest));
    } catch (const json::exception& e) {
        throw std::runtime_error("corrupt manifest: " + std::string(e.what()));
    }
    for (const auto& entry : j.at("problems")) {
        std::string id = entry.get<std::string>();
        fs::path meta = fs::path(root) / "problems" / id / "meta.json";
        if (!fs::exists(meta))
            throw std::runtime_error("corrupt manifest: record '" + id + "' has no meta.json");
        ProblemRecord r;
        try {
            r = record_from_meta(json::parse(read_file(meta)));
        } catch (const json::exception& e) {
            throw std::runtime_error("record '" + id + "': bad meta.json: " + e.what());
        }
        if (r.id != id)
            throw std::runtime_error("record '" + id + "': meta.json id mismatch");
        validate_record(root, r);
        store.records_[id] = std::move(r);
    }
    return store;
}

std::vector<std::string> Store::list() const {
    std::vector<std::string> ids;
    for (const auto& [id, r] : records_) ids.push_back(id);
    return ids;
}

const ProblemRecord* Store::record(const std::string& id) const {
    auto it = records_.find(id);
    return it == records_.end() ? nullptr : &it->second;
}

std::pair<std::string, std::string> Store::get(const std::string& id,
                                               const std::string& format) const {
    const ProblemRecord* r = record(id);
    if (!r) throw NotFoundError("no problem '" + id + "'");
    std::string actual = "fof";
    for (const auto& f : r->formats)
        if (f == format) actual = format;
    return {actual, read_file(fs::path(root_) / "problems" / id / format_files().at(actual))};
}

void Store::ingest(const std::string& id, const std::string& title,
                   const std::map<std::string, std::string>& files, bool overwrite,
                   const std::function<void()>& pre_commit_hook) {
    if (!valid_problem_id(id)) throw std::runtime_error("invalid problem id '" + id + "'");
    if (records_.count(id) && !overwrite)
        throw std::runtime_error("problem '" + id + "' already exists (use overwrite)");
    if (!files.count("fof")) throw std::runtime_error("ingest requires fof content");

    // Reject unparsable content before touching the store.
    for (const auto& [format, path] : files) {
        if (!format_files().count(format))
            throw std::runtime_error("unknown format '" + format + "'");
        std::string content = read_file(path);
        try {
            if (format == "fof")
                fof::parse_fof(content);
            else if (format == "gcl")
                conjecture::parse_gcl(content);
            else if (format == "jgex")
                conjecture::parse_jgex(content);
            else
                conjecture::parse_ggb_xml(content);
        } catch (const std::exception& e) {
            throw std::runtime_error("file '" + path + "' does not parse as " + format + ": " +
                                     e.what());
        }
    }

    ProblemRecord r;
    r.id = id;
    r.title = title;
    r.modified = now_iso8601();
    r.created = records_.count(id) ? records_[id].created : r.modified;
    fs::path dir = fs::path(root_) / "problems" / id;
    fs::create_directories(dir);
    for (const auto& [format, path] : files) {
        write_file(dir / format_files().at(format), read_file(path));
        r.formats.push_back(format);
    }
    write_file(dir / "meta.json", meta_to_json(r).dump(2) + "\n");

    if (pre_commit_hook) pre_commit_hook();

    // Manifest rewrite is atomic: temp file + rename.
    auto updated = records_;
    updated[id] = r;
    json manifest;
    manifest["problems"] = json::array();
    for (const auto& [rid, rec] : updated) manifest["problems"].push_back(rid);
    fs::path manifest_path = fs::path(root_) / "manifest.json";
    fs::path tmp = fs::path(root_) / "manifest.json.tmp";
    write_file(tmp, manifest.dump(2) + "\n");
    fs::rename(tmp, manifest_path);
    records_ = std::move(updated);
}

// --- Wire protocol -------------------------------------------------------

namespace {

std::string error_response(const std::string& code, const std::string& message) {
    json j;
    j["status"] = "error";
    j["code"] = code;
    j["message"] = message;
    return j.dump() + "\n";
}

std::string handle_request(const Store& store, const std::string& line) {
    json req;
    try {
        req = json::parse(line);
    } catch (const json::exception&) {
        return error_response("bad_request", "request is not valid JSON");
    }
    if (!req.is_object() || !req.contains("op") || !req["op"].is_string())
        return error_response("bad_request", "missing 'op'");
    std::string op = req["op"];
    try {
        if (op == "list") {
            json j;
            j["status"] = "ok";
            j["ids"] = store.list();
            return j.dump() + "\n";
        }
        if (op == "get") {
            if (!req.contains("id") || !req["id"].is_string())
                return error_response("bad_request", "get requires 'id'");
            std::string format = "fof";
            if (req.contains("format")) {
                if (!req["format"].is_string())
                    return error_response("bad_request", "'format' must be a string");
                format = req["format"];
                if (!format_files().count(format))
                    return error_response("bad_request", "unknown format '" + format + "'");
            }
            auto [actual, content] = store.get(req["id"], format);
            json j;
            j["status"] = "ok";
            j["id"] = req["id"];
            j["format"] = actual;
            j["content"] = content;
            return j.dump() + "\n";
        }
        return error_response("bad_request", "unknown op '" + op + "'");
    } catch (const NotFoundError& e) {
        return error_response("not_found", e.what());
    } catch (const std::exception& e) {
        return error_response("internal", e.what());
    }
}

bool send_all(int fd, const std::string& data) {
    size_t off = 0;
    while (off < data.size()) {
        ssize_t n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n <= 0) return false;
        off += static_cast<size_t>(n);
    }
    return true;
}

constexpr size_t kMaxRequestLine = 1 << 20;

}  // namespace

struct Server::Impl {
    Store store;
    int listen_fd = -1;
    int actual_port = 0;
    std::atomic<bool> running{true};
    std::thread accept_thread;
    std::mutex mu;
    std::vector<std::thread> workers;

    void serve_connection(int fd) {
        std::string line;
        char buf[4096];
        bool have_line = false;
        while (line.size() < kMaxRequestLine) {
            ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
            if (n <= 0) break;
            line.append(buf, static_cast<size_t>(n));
            auto nl = line.find('\n');
            if (nl != std::string::npos) {
                line.resize(nl);
                have_line = true;
                break;
            }
        }
        if (have_line || !line.empty())
            send_all(fd, handle_request(store, line));
        ::close(fd);
    }

    void accept_loop() {
        while (running.load()) {
            struct pollfd pfd{listen_fd, POLLIN, 0};
            int rc = ::poll(&pfd, 1, 100);
            if (rc <= 0) continue;
            int fd = ::accept(listen_fd, nullptr, nullptr);
            if (fd < 0) continue;
            std::lock_guard<std::mutex> lock(mu);
            workers.emplace_back([this, fd] { serve_connection(fd); });
        }
    }
};

Server::Server(Store store, const std::string& bind_address, int port)
    : impl_(std::make_unique<Impl>()) {
    impl_->store = std::move(store);
    int fd = ::socket(AF_INET, SOCK_STREAM, 0);
    if (fd < 0) throw std::runtime_error("cannot create socket");
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    sockaddr_in addr{};
    addr.sin_family = AF_INET;
    addr.sin_port = htons(static_cast<uint16_t>(port));
    if (bind_address.empty() || bind_address == "0.0.0.0") {
        addr.sin_addr.s_addr = INADDR_ANY;
    } else if (::inet_pton(AF_INET, bind_address.c_str(), &addr.sin_addr) != 1) {
        ::close(fd);
        throw std::runtime_error("invalid bind address '" + bind_address + "'");
    }
    if (::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
        ::close(fd);
        throw std::runtime_error("cannot bind to " + bind_address + ":" +
                                 std::to_string(port));
    }
    if (::listen(fd, 64) != 0) {
        ::close(fd);
        throw std::runtime_error("listen failed");
    }
    sockaddr_in actual{};
    socklen_t len = sizeof(actual);
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&actual), &len);
    impl_->listen_fd = fd;
    impl_->actual_port = ntohs(actual.sin_port);
    impl_->accept_thread = std::thread([this] { impl_->accept_loop(); });
}

Server::~Server() { stop(); }

int Server::port() const { return impl_->actual_port; }

void Server::stop() {
    if (!impl_ || !impl_->running.exchange(false)) return;
    if (impl_->accept_thread.joinable()) impl_->accept_thread.join();
    ::close(impl_->listen_fd);
    std::lock_guard<std::mutex> lock(impl_->mu);
    for (auto& w : impl_->workers)
        if (w.joinable()) w.join();
}

// --- Client ----------------------------------------------------------------

namespace {

int connect_with_timeout(const std::string& endpoint, std::int64_t timeout_ms) {
    auto colon = endpoint.rfind(':');
    if (colon == std::string::npos)
        throw TransportError("endpoint '" + endpoint + "' is not host:port");
    std::string host = endpoint.substr(0, colon);
    std::string port = endpoint.substr(colon + 1);

    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    if (::getaddrinfo(host.c_str(), port.c_str(), &hints, &res) != 0 || !res)
        throw TransportError("cannot resolve '" + endpoint + "'");

    int fd = ::socket(res->ai_family, SOCK_STREAM, 0);
    if (fd < 0) {
        ::freeaddrinfo(res);
        throw TransportError("cannot create socket");
    }
    int flags = ::fcntl(fd, F_GETFL, 0);
    ::fcntl(fd, F_SETFL, flags | O_NONBLOCK);
    int rc = ::connect(fd, res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc != 0 && errno != EINPROGRESS) {
        ::close(fd);
        throw TransportError("connection to " + endpoint + " failed: " +
                             std::strerror(errno));
    }
    if (rc != 0) {
        struct pollfd pfd{fd, POLLOUT, 0};
        rc = ::poll(&pfd, 1, static_cast<int>(timeout_ms));
        int err = 0;
        socklen_t len = sizeof(err);
        if (rc <= 0 ||
            ::getsockopt(fd, SOL_SOCKET, SO_ERROR, &err, &len) != 0 || err != 0) {
            ::close(fd);
            throw TransportError("connection to " + endpoint +
                                 (rc <= 0 ? " timed out" : std::string(" failed: ") +
                                                               std::strerror(err)));
        }
    }
    ::fcntl(fd, F_SETFL, flags);
    return fd;
}

}  // namespace

std::string client_roundtrip(const std::string& endpoint, const std::string& request_line,
                             std::int64_t timeout_ms) {
    int fd = connect_with_timeout(endpoint, timeout_ms);
    std::string request = request_line;
    if (request.empty() || request.back() != '\n') request += '\n';
    if (!send_all(fd, request)) {
        ::close(fd);
        throw TransportError("send to " + endpoint + " failed");
    }
    std::string response;
    char buf[4096];
    auto deadline =
        std::chrono::steady_clock::now() + std::chrono::milliseconds(timeout_ms);
    for (;;) {
        auto remaining = std::chrono::duration_cast<std::chrono::milliseconds>(
                             deadline - std::chrono::steady_clock::now())
                             .count();
        if (remaining <= 0) {
            ::close(fd);
            throw TransportError("response from " + endpoint + " timed out");
        }
        struct pollfd pfd{fd, POLLIN, 0};
        if (::poll(&pfd, 1, static_cast<int>(remaining)) <= 0) continue;
        ssize_t n = ::recv(fd, buf, sizeof(buf), 0);
        if (n <= 0) break;
        response.append(buf, static_cast<size_t>(n));
        if (response.find('\n') != std::string::npos) break;
    }
    ::close(fd);
    auto nl = response.find('\n');
    if (nl == std::string::npos)
        throw TransportError("connection closed before a full response line");
    return response.substr(0, nl);
}

namespace {

json parse_response(const std::string& line) {
    json j;
    try {
        j = json::parse(line);
    } catch (const json::exception&) {
        throw TransportError("malformed response from server");
    }
    if (j.value("status", "") == "error")
        throw RemoteError(j.value("code", "internal"), j.value("message", "server error"));
    if (j.value("status", "") != "ok") throw TransportError("malformed response from server");
    return j;
}

}  // namespace

std::pair<std::string, std::string> client_get(const std::string& endpoint,
                                               const std::string& id,
                                               const std::string& format,
                                               std::int64_t timeout_ms) {
    json req;
    req["op"] = "get";
    req["id"] = id;
    req["format"] = format;
    json j = parse_response(client_roundtrip(endpoint, req.dump(), timeout_ms));
    return {j.at("format").get<std::string>(), j.at("content").get<std::string>()};
}

std::vector<std::string> client_list(const std::string& endpoint, std::int64_t timeout_ms) {
    json req;
    req["op"] = "list";
    json j = parse_response(client_roundtrip(endpoint, req.dump(), timeout_ms));
    std::vector<std::string> ids;
    for (const auto& id : j.at("ids")) ids.push_back(id.get<std::string>());
    return ids;
}

}  // namespace ogp::repo
