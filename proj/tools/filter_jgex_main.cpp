#include "ogp/filters.hpp"

int main(int argc, char** argv) {
    return ogp::filters::filter_main(ogp::filters::Dialect::Jgex, argc, argv);
}
