// Problem repository daemon and store maintenance.
//   ogp-repod --root <dir> [--port <p>] [--bind <addr>]
//   ogp-repod ingest --root <dir> --id GEO0004 --title <t> <format>=<file>...
//                    [--overwrite]

#include <unistd.h>

#include <csignal>
#include <iostream>
#include <map>

#include "ogp/repo.hpp"

namespace {

volatile std::sig_atomic_t g_stop = 0;
void on_signal(int) { g_stop = 1; }

int serve(int argc, char** argv) {
    std::string root;
    std::string bind = "0.0.0.0";
    int port = 7331;
    for (int i = 1; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--root" && i + 1 < argc) {
            root = argv[++i];
        } else if (arg == "--port" && i + 1 < argc) {
            port = std::stoi(argv[++i]);
        } else if (arg == "--bind" && i + 1 < argc) {
            bind = argv[++i];
        } else {
            std::cerr << "error: unknown or incomplete option '" << arg << "'\n";
            return 1;
        }
    }
    if (root.empty()) {
        std::cerr << "usage: ogp-repod --root <dir> [--port <p>] [--bind <addr>]\n";
        return 1;
    }
    try {
        ogp::repo::Store store = ogp::repo::Store::open(root);
        ogp::repo::Server server(std::move(store), bind, port);
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        std::cout << "listening on " << bind << ":" << server.port() << "\n";
        while (!g_stop) pause();
        server.stop();
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int ingest(int argc, char** argv) {
    std::string root, id, title;
    bool overwrite = false;
    std::map<std::string, std::string> files;
    for (int i = 2; i < argc; ++i) {
        std::string arg = argv[i];
        if (arg == "--root" && i + 1 < argc) {
            root = argv[++i];
        } else if (arg == "--id" && i + 1 < argc) {
            id = argv[++i];
        } else if (arg == "--title" && i + 1 < argc) {
            title = argv[++i];
        } else if (arg == "--overwrite") {
            overwrite = true;
        } else if (auto eq = arg.find('='); eq != std::string::npos) {
            files[arg.substr(0, eq)] = arg.substr(eq + 1);
        } else {
            std::cerr << "error: unknown argument '" << arg << "'\n";
            return 1;
        }
    }
    if (root.empty() || id.empty() || files.empty()) {
        std::cerr << "usage: ogp-repod ingest --root <dir> --id <GEO####> [--title <t>]"
                     " <format>=<file>... [--overwrite]\n";
        return 1;
    }
    try {
        ogp::repo::Store store = ogp::repo::Store::open(root);
        store.ingest(id, title, files, overwrite);
        std::cout << "ingested " << id << "\n";
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    if (argc > 1 && std::string(argv[1]) == "ingest") return ingest(argc, argv);
    return serve(argc, argv);
}
