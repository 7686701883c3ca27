#include "ogp/cli.hpp"

int main(int argc, char** argv) { return ogp::cli::main_impl(argc, argv); }
