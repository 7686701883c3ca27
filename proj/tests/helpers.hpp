#ifndef OGP_TESTS_HELPERS_HPP
#define OGP_TESTS_HELPERS_HPP

#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace testutil {

inline std::string fixture_dir() { return OGP_FIXTURE_DIR; }
inline std::string bin_dir() { return OGP_BIN_DIR; }

inline std::string fixture(const std::string& rel) { return fixture_dir() + "/" + rel; }

inline std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("fixture missing: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void spit(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

inline std::vector<std::string> corpus_files() {
    std::vector<std::string> files;
    for (const auto& e : std::filesystem::directory_iterator(fixture("corpus")))
        if (e.path().extension() == ".fof") files.push_back(e.path().string());
    std::sort(files.begin(), files.end());
    return files;
}

// Scratch directory unique to one test binary run.
inline std::string scratch_dir(const std::string& tag) {
    auto dir = std::filesystem::temp_directory_path() /
               ("ogp-test-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir.string();
}

}  // namespace testutil

#endif
