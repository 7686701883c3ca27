#include "ogp/runtime.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "ogp/ddfa.hpp"
#include "ogp/filters.hpp"
#include "ogp/fof.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace ogp::runtime {

std::string format_name(Format f) {
    switch (f) {
        case Format::Fof: return "fof";
        case Format::Gcl: return "gcl";
        case Format::Jgex: return "jgex";
        case Format::Geogebra: return "geogebra";
        case Format::Coqam: return "coqam";
    }
    return "?";
}

std::optional<Format> format_from_name(const std::string& s) {
    if (s == "fof") return Format::Fof;
    if (s == "gcl") return Format::Gcl;
    if (s == "jgex") return Format::Jgex;
    if (s == "geogebra") return Format::Geogebra;
    if (s == "coqam") return Format::Coqam;
    return std::nullopt;
}

std::optional<Format> format_from_extension(const std::string& ext) {
    if (ext == ".fof") return Format::Fof;
    if (ext == ".ax") return Format::Fof;
    if (ext == ".gcl") return Format::Gcl;
    if (ext == ".jgex") return Format::Jgex;
    if (ext == ".ggb.xml") return Format::Geogebra;
    if (ext == ".coqam") return Format::Coqam;
    return std::nullopt;
}

std::string extension_for_format(Format f) {
    switch (f) {
        case Format::Fof: return ".fof";
        case Format::Gcl: return ".gcl";
        case Format::Jgex: return ".jgex";
        case Format::Geogebra: return ".ggb.xml";
        case Format::Coqam: return ".coqam";
    }
    return "";
}

// --- Report JSON --------------------------------------------------------

std::string report_to_json(const RunReport& r) {
    json j;
    j["prover"] = r.prover;
    j["status"] = status_name(r.status);
    j["time_ms"] = r.time_ms;
    if (r.proof_path) j["proof_path"] = *r.proof_path;
    if (!r.detail.empty()) j["detail"] = r.detail;
    if (!r.raw_output.empty()) j["raw_output"] = r.raw_output;
    return j.dump();
}

RunReport report_from_json(const std::string& text) {
    json j = json::parse(text);
    RunReport r;
    r.prover = j.value("prover", "");
    auto status = status_from_name(j.at("status").get<std::string>());
    if (!status) throw std::runtime_error("unknown status in report JSON");
    r.status = *status;
    r.time_ms = j.value("time_ms", std::int64_t{0});
    if (j.contains("proof_path")) r.proof_path = j["proof_path"].get<std::string>();
    r.detail = j.value("detail", "");
    r.raw_output = j.value("raw_output", "");
    return r;
}

// --- Registry -----------------------------------------------------------

namespace {

ProverSpec builtin_ddfa() {
    ProverSpec s;
    s.name = "ddfa";
    s.native = true;
    s.accepted_formats = {Format::Fof};
    s.default_for_extensions = {".gcl", ".jgex", ".ggb.xml"};
    return s;
}

ProverSpec spec_from_json(const json& j) {
    ProverSpec s;
    s.name = j.at("name").get<std::string>();
    std::string kind = j.value("kind", "external");
    if (kind != "external" && kind != "native")
        throw std::runtime_error("prover '" + s.name + "': kind must be native or external");
    s.native = kind == "native";
    for (const auto& f : j.at("formats")) {
        auto fmt = format_from_name(f.get<std::string>());
        if (!fmt)
            throw std::runtime_error("prover '" + s.name + "': unknown format '" +
                                     f.get<std::string>() + "'");
        s.accepted_formats.push_back(*fmt);
    }
    s.executable = j.value("exec", "");
    if (j.contains("args"))
        for (const auto& a : j["args"]) s.arg_template.push_back(a.get<std::string>());
    s.post_processor = j.value("post", "");
    if (j.contains("default_for"))
        for (const auto& e : j["default_for"])
            s.default_for_extensions.push_back(e.get<std::string>());
    return s;
}

}  // namespace

Registry Registry::builtin() {
    Registry r;
    r.specs_.push_back(builtin_ddfa());
    r.validate();
    return r;
}

Registry Registry::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw std::runtime_error(std::string("malformed registry JSON: ") + e.what());
    }
    Registry r;
    if (!j.contains("provers") || !j["provers"].is_array())
        throw std::runtime_error("registry JSON: missing 'provers' array");
    bool have_ddfa = false;
    for (const auto& p : j["provers"]) {
        try {
            ProverSpec s = spec_from_json(p);
            if (s.name == "ddfa") {
                have_ddfa = true;
                if (!s.native)
                    throw std::runtime_error("'ddfa' names the built-in native prover");
            }
            r.specs_.push_back(std::move(s));
        } catch (const json::exception& e) {
            throw std::runtime_error(std::string("registry JSON: ") + e.what());
        }
    }
    if (!have_ddfa) {
        // Built in; yields extension defaults claimed by the config.
        ProverSpec ddfa = builtin_ddfa();
        std::set<std::string> claimed;
        for (const auto& s : r.specs_)
            claimed.insert(s.default_for_extensions.begin(), s.default_for_extensions.end());
        std::erase_if(ddfa.default_for_extensions,
                      [&](const std::string& e) { return claimed.count(e) != 0; });
        r.specs_.insert(r.specs_.begin(), std::move(ddfa));
    }
    r.validate();
    return r;
}

Registry Registry::load(const std::string& config_path) {
    std::ifstream in(config_path);
    if (!in) throw std::runtime_error("cannot open registry config '" + config_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

void Registry::validate() const {
    std::set<std::string> names;
    std::set<std::string> extensions;
    for (const auto& s : specs_) {
        if (s.name.empty()) throw std::runtime_error("registry: prover with empty name");
        if (!names.insert(s.name).second)
            throw std::runtime_error("registry: duplicate prover name '" + s.name + "'");
        if (s.accepted_formats.empty())
            throw std::runtime_error("prover '" + s.name + "': no accepted formats");
        if (s.native && !s.executable.empty())
            throw std::runtime_error("prover '" + s.name + "': native provers take no exec");
        if (!s.native && s.executable.empty())
            throw std::runtime_error("prover '" + s.name + "': external prover needs exec");
        for (const auto& e : s.default_for_extensions)
            if (!extensions.insert(e).second)
                throw std::runtime_error("registry: duplicate default for extension '" + e +
                                         "'");
    }
}

const ProverSpec* Registry::find(const std::string& name) const {
    for (const auto& s : specs_)
        if (s.name == name) return &s;
    return nullptr;
}

const ProverSpec* Registry::default_for_extension(const std::string& ext) const {
    for (const auto& s : specs_)
        for (const auto& e : s.default_for_extensions)
            if (e == ext) return &s;
    return nullptr;
}

std::vector<std::string> Registry::external_names() const {
    std::vector<std::string> out;
    for (const auto& s : specs_)
        if (!s.native) out.push_back(s.name);
    return out;
}

// --- Format negotiation ---------------------------------------------------

ConversionPlan negotiate_format(const ProverSpec& spec, Format source_format) {
    for (Format f : spec.accepted_formats)
        if (f == source_format) return {ConversionPlan::Kind::Direct, ""};
    bool filter_exists = source_format == Format::Gcl || source_format == Format::Jgex ||
                         source_format == Format::Geogebra;
    bool accepts_fof = std::find(spec.accepted_formats.begin(), spec.accepted_formats.end(),
                                 Format::Fof) != spec.accepted_formats.end();
    if (filter_exists && accepts_fof) return {ConversionPlan::Kind::ViaFilter, ""};
    std::string reason = "prover '" + spec.name + "' does not accept format '" +
                         format_name(source_format) + "'";
    if (!filter_exists)
        reason += " and no filter to FOF exists for it";
    else
        reason += " and does not accept FOF";
    return {ConversionPlan::Kind::Unsupported, reason};
}

// --- Helpers --------------------------------------------------------------

std::string make_temp_file(const std::string& suffix) {
    std::string templ =
        (fs::temp_directory_path() / ("ogp-XXXXXX" + suffix)).string();
    std::vector<char> buf(templ.begin(), templ.end());
    buf.push_back('\0');
    int fd = ::mkstemps(buf.data(), static_cast<int>(suffix.size()));
    if (fd < 0) throw std::runtime_error("cannot create temp file");
    ::close(fd);
    return std::string(buf.data());
}

std::vector<std::string> include_search_paths(const std::string& input_file) {
    std::vector<std::string> paths;
    fs::path dir = fs::path(input_file).parent_path();
    paths.push_back(dir.empty() ? "." : dir.string());
    paths.push_back(".");
    if (const char* extra = std::getenv("OGP_INCLUDE_PATH")) {
        std::stringstream ss(extra);
        std::string item;
        while (std::getline(ss, item, ':'))
            if (!item.empty()) paths.push_back(item);
    }
    return paths;
}

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string find_executable(const std::string& exec) {
    if (exec.find('/') != std::string::npos)
        return ::access(exec.c_str(), X_OK) == 0 ? exec : "";
    if (const char* path = std::getenv("PATH")) {
        std::stringstream ss(path);
        std::string dir;
        while (std::getline(ss, dir, ':')) {
            if (dir.empty()) continue;
            std::string cand = dir + "/" + exec;
            if (::access(cand.c_str(), X_OK) == 0) return cand;
        }
    }
    return "";
}

std::string expand_template(const std::string& arg, const std::string& input,
                            std::int64_t timeout_ms) {
    std::string out = arg;
    auto replace_all = [&](const std::string& from, const std::string& to) {
        size_t pos = 0;
        while ((pos = out.find(from, pos)) != std::string::npos) {
            out.replace(pos, from.size(), to);
            pos += to.size();
        }
    };
    replace_all("{input}", input);
    // Timeout placeholder is in whole seconds, rounded up.
    replace_all("{timeout}", std::to_string((timeout_ms + 999) / 1000));
    return out;
}

struct ChildResult {
    std::string output;
    bool timed_out = false;
    bool cancelled = false;
    int exit_code = -1;
};

ChildResult run_child(const std::string& exec_path, const std::vector<std::string>& args,
                      std::int64_t timeout_ms, const std::atomic<bool>* cancel) {
    int pipefd[2];
    if (::pipe(pipefd) != 0) throw std::runtime_error("pipe failed");
    pid_t pid = ::fork();
    if (pid < 0) {
        ::close(pipefd[0]);
        ::close(pipefd[1]);
        throw std::runtime_error("fork failed");
    }
    if (pid == 0) {
        // Drop any signal handlers inherited from the caller so a kill that
        // lands in the fork-to-exec window terminates this copy silently.
        ::signal(SIGTERM, SIG_DFL);
        ::signal(SIGINT, SIG_DFL);
        ::setpgid(0, 0);
        ::dup2(pipefd[1], STDOUT_FILENO);
        ::dup2(pipefd[1], STDERR_FILENO);
        ::close(pipefd[0]);
        ::close(pipefd[1]);
        std::vector<char*> argv;
        argv.push_back(const_cast<char*>(exec_path.c_str()));
        for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
        argv.push_back(nullptr);
        ::execv(exec_path.c_str(), argv.data());
        ::_exit(127);
    }
    ::setpgid(pid, pid);  // also from the parent: no window for escapes
    ::close(pipefd[1]);

    ChildResult result;
    auto deadline = Clock::now() + std::chrono::milliseconds(timeout_ms);
    bool killed = false;
    char buf[4096];
    for (;;) {
        if (!killed) {
            bool want_cancel = cancel && cancel->load();
            if (want_cancel || Clock::now() >= deadline) {
                result.timed_out = !want_cancel;
                result.cancelled = want_cancel;
                ::killpg(pid, SIGTERM);
                killed = true;
            }
        }
        struct pollfd pfd{pipefd[0], POLLIN, 0};
        int rc = ::poll(&pfd, 1, killed ? 50 : 20);
        if (rc > 0) {
            ssize_t n = ::read(pipefd[0], buf, sizeof(buf));
            if (n > 0) {
                result.output.append(buf, static_cast<size_t>(n));
                continue;
            }
            break;  // EOF: every write end is closed
        }
        if (killed) {
            // Did not exit on SIGTERM quickly enough.
            ::killpg(pid, SIGKILL);
            break;
        }
    }
    if (killed) ::killpg(pid, SIGKILL);
    ::close(pipefd[0]);
    int wstatus = 0;
    ::waitpid(pid, &wstatus, 0);
    if (WIFEXITED(wstatus)) result.exit_code = WEXITSTATUS(wstatus);
    return result;
}

RunReport run_native(const ProverSpec& spec, const std::string& file,
                     const std::string& extra_search_dir, std::int64_t timeout_ms,
                     const std::atomic<bool>* cancel) {
    RunReport report;
    report.prover = spec.name;
    auto t0 = Clock::now();
    auto finish = [&] {
        report.time_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
        return report;
    };
    try {
        fof::FofDocument doc = fof::parse_fof(read_file(file));
        auto paths = include_search_paths(file);
        if (!extra_search_dir.empty()) paths.push_back(extra_search_dir);
        doc = fof::resolve_includes(doc, paths);
        ddfa::SaturationLimits limits;
        limits.timeout_ms = timeout_ms;
        ddfa::ProveResult res = ddfa::prove(doc, limits, cancel);
        report.status = res.status;
        report.detail = res.detail;
        if (res.status == Status::Proved) {
            std::string proof_path = make_temp_file(".proof");
            std::ofstream out(proof_path);
            out << res.proof;
            report.proof_path = proof_path;
        }
    } catch (const std::exception& e) {
        report.status = Status::Error;
        report.detail = e.what();
    }
    return finish();
}

}  // namespace

std::pair<Status, std::optional<std::int64_t>> postprocess_szs(const std::string& raw) {
    static const std::regex status_re(R"(%\s*SZS\s+status\s+(\w+))");
    static const std::regex time_re(R"(%\s*Time elapsed:\s*([0-9]*\.?[0-9]+)\s*s)");
    Status status = Status::Unknown;
    std::smatch m;
    if (std::regex_search(raw, m, status_re)) {
        std::string s = m[1];
        if (s == "Theorem" || s == "Unsatisfiable")
            status = Status::Proved;
        else if (s == "CounterSatisfiable" || s == "Satisfiable")
            status = Status::Disproved;
        else if (s == "Timeout" || s == "ResourceOut")
            status = Status::Timeout;
        else
            status = Status::Unknown;  // GaveUp, Unknown, anything else
    }
    std::optional<std::int64_t> ms;
    if (std::regex_search(raw, m, time_re))
        ms = std::llround(std::stod(m[1]) * 1000.0);
    return {status, ms};
}

RunReport run(const ProverSpec& spec, const std::string& conjecture_file, Format source_format,
              std::int64_t timeout_ms, const std::vector<std::string>& prover_options,
              const std::atomic<bool>* cancel) {
    RunReport report;
    report.prover = spec.name;

    ConversionPlan plan = negotiate_format(spec, source_format);
    if (plan.kind == ConversionPlan::Kind::Unsupported) {
        report.status = Status::Error;
        report.detail = plan.reason;
        return report;
    }

    std::string input_file = conjecture_file;
    std::string extra_search_dir;
    if (plan.kind == ConversionPlan::Kind::ViaFilter) {
        filters::Dialect dialect = source_format == Format::Gcl ? filters::Dialect::Gcl
                                   : source_format == Format::Jgex
                                       ? filters::Dialect::Jgex
                                       : filters::Dialect::Geogebra;
        std::ifstream in(conjecture_file);
        if (!in) {
            report.status = Status::Error;
            report.detail = "cannot open '" + conjecture_file + "'";
            return report;
        }
        std::ostringstream out, err;
        if (filters::filter_cli(dialect, in, out, err) != 0) {
            report.status = Status::Error;
            report.detail = err.str();
            return report;
        }
        input_file = make_temp_file(".fof");
        std::ofstream fof_out(input_file);
        fof_out << out.str();
        // The filtered problem includes axioms relative to the original
        // conjecture's location.
        extra_search_dir = fs::path(conjecture_file).parent_path().string();
    }

    if (spec.native)
        return run_native(spec, input_file, extra_search_dir, timeout_ms, cancel);

    auto t0 = Clock::now();
    auto finish = [&] {
        report.time_ms =
            std::chrono::duration_cast<std::chrono::milliseconds>(Clock::now() - t0).count();
        return report;
    };

    std::string exec_path = find_executable(spec.executable);
    if (exec_path.empty()) {
        report.status = Status::Error;
        report.detail = "executable not found: '" + spec.executable + "'";
        return finish();
    }
    std::vector<std::string> args;
    for (const auto& a : spec.arg_template)
        args.push_back(expand_template(a, input_file, timeout_ms));
    args.insert(args.end(), prover_options.begin(), prover_options.end());

    ChildResult child = run_child(exec_path, args, timeout_ms, cancel);
    report.raw_output = child.output;
    if (child.cancelled) {
        report.status = Status::Timeout;
        report.detail = "cancelled";
        return finish();
    }
    if (child.timed_out) {
        report.status = Status::Timeout;
        return finish();
    }
    if (child.exit_code == 127) {
        report.status = Status::Error;
        report.detail = "failed to execute '" + exec_path + "'";
        return finish();
    }
    if (spec.post_processor == "szs") {
        auto [status, self_ms] = postprocess_szs(child.output);
        report.status = status;
        if (self_ms) report.detail = "prover-reported time: " + std::to_string(*self_ms) + " ms";
        return finish();
    }
    if (!spec.post_processor.empty()) {
        report.status = Status::Error;
        report.detail = "unknown post-processor '" + spec.post_processor + "'";
        return finish();
    }
    // No post-processor: expect the native report envelope on stdout.
    auto start = child.output.find('{');
    if (start != std::string::npos) {
        try {
            RunReport inner = report_from_json(child.output.substr(start));
            report.status = inner.status;
            report.proof_path = inner.proof_path;
            if (!inner.detail.empty()) report.detail = inner.detail;
            return finish();
        } catch (const std::exception&) {
            // fall through
        }
    }
    report.status = Status::Unknown;
    report.detail = "no post-processor and output is not a report";
    return finish();
}

}  // namespace ogp::runtime
