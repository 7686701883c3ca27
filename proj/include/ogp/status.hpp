#ifndef OGP_STATUS_HPP
#define OGP_STATUS_HPP

#include <optional>
#include <string>

namespace ogp {

// Uniform prover verdict, shared by the native prover and the runtime.
enum class Status { Proved, Disproved, Unknown, Timeout, ResourceOut, Error };

inline std::string status_name(Status s) {
    switch (s) {
        case Status::Proved: return "Proved";
        case Status::Disproved: return "Disproved";
        case Status::Unknown: return "Unknown";
        case Status::Timeout: return "Timeout";
        case Status::ResourceOut: return "ResourceOut";
        case Status::Error: return "Error";
    }
    return "Error";
}

inline std::optional<Status> status_from_name(const std::string& s) {
    if (s == "Proved") return Status::Proved;
    if (s == "Disproved") return Status::Disproved;
    if (s == "Unknown") return Status::Unknown;
    if (s == "Timeout") return Status::Timeout;
    if (s == "ResourceOut") return Status::ResourceOut;
    if (s == "Error") return Status::Error;
    return std::nullopt;
}

}  // namespace ogp

#endif
