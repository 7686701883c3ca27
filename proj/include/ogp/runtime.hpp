#ifndef OGP_RUNTIME_HPP
#define OGP_RUNTIME_HPP

#include <atomic>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ogp/status.hpp"

namespace ogp::runtime {

enum class Format { Fof, Gcl, Jgex, Geogebra, Coqam };

std::string format_name(Format f);
std::optional<Format> format_from_name(const std::string& s);
// ".fof" -> Fof, ".gcl" -> Gcl, ".jgex" -> Jgex, ".ggb.xml" -> Geogebra,
// ".coqam" -> Coqam.
std::optional<Format> format_from_extension(const std::string& ext);
std::string extension_for_format(Format f);

struct ProverSpec {
    std::string name;
    bool native = false;
    std::vector<Format> accepted_formats;
    std::string executable;                 // external only
    std::vector<std::string> arg_template;  // {input} and {timeout} placeholders
    std::string post_processor;             // "" or "szs"
    std::vector<std::string> default_for_extensions;
};

struct RunReport {
    std::string prover;
    Status status = Status::Unknown;
    std::int64_t time_ms = 0;  // wall clock around the prover call
    std::optional<std::string> proof_path;
    std::string raw_output;
    std::string detail;
};

std::string report_to_json(const RunReport& report);
RunReport report_from_json(const std::string& json_text);

class Registry {
public:
    // The native ddfa prover is always present; a config entry named
    // "ddfa" may override its extension defaults.
    static Registry load(const std::string& config_path);
    static Registry from_json(const std::string& json_text);
    static Registry builtin();

    const std::vector<ProverSpec>& specs() const { return specs_; }
    const ProverSpec* find(const std::string& name) const;
    const ProverSpec* default_for_extension(const std::string& ext) const;
    std::vector<std::string> external_names() const;

private:
    void validate() const;
    std::vector<ProverSpec> specs_;
};

struct ConversionPlan {
    enum class Kind { Direct, ViaFilter, Unsupported };
    Kind kind = Kind::Unsupported;
    std::string reason;  // Unsupported only
};

// Direct when the prover accepts the source format; otherwise through the
// dialect's FOF filter when one exists and the prover accepts FOF.
ConversionPlan negotiate_format(const ProverSpec& spec, Format source_format);

// Executes the prover on the conjecture file under a hard wall-clock
// timeout. Native provers run in-process; external ones are spawned in
// their own process group, which is terminated on timeout or
// cancellation. Include directives are resolved against the input file's
// directory, the working directory and OGP_INCLUDE_PATH.
RunReport run(const ProverSpec& spec, const std::string& conjecture_file,
              Format source_format, std::int64_t timeout_ms,
              const std::vector<std::string>& prover_options = {},
              const std::atomic<bool>* cancel = nullptr);

// `% SZS status <S>` and `% Time elapsed: <x> s` extraction. Total: a
// missing status line yields Unknown.
std::pair<Status, std::optional<std::int64_t>> postprocess_szs(const std::string& raw_output);

// Search paths used for include resolution (input dir, cwd,
// OGP_INCLUDE_PATH entries).
std::vector<std::string> include_search_paths(const std::string& input_file);

// Creates an empty temp file `ogp-*<suffix>` under the system temp root.
std::string make_temp_file(const std::string& suffix);

}  // namespace ogp::runtime

#endif
