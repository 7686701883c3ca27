#ifndef OGP_FILTERS_HPP
#define OGP_FILTERS_HPP

#include <iosfwd>
#include <string>

#include "ogp/conjecture.hpp"
#include "ogp/fof.hpp"

namespace ogp::filters {

inline constexpr const char* kDefaultAxiomInclude = "axioms/ddfa.ax";

enum class Dialect { Gcl, Jgex, Geogebra };

// Shared semantic core behind filterGCLtoFOF / filterJGEXtoFOF /
// filterGEOGEBRAtoFOF: one hypothesis atom per construction consequence
// (h1..hn in step order), the goal as the single conjecture, and the
// axiom include first. Point labels are lowercased to constants.
fof::FofDocument conjecture_to_fof(const conjecture::GeoConjecture& c,
                                   const std::string& axiom_include = kDefaultAxiomInclude);

// stdin->stdout filter driver. Returns the process exit status: 0 on
// success, 1 on parse or mapping errors (diagnostic on err, nothing
// written to out).
int filter_cli(Dialect dialect, std::istream& in, std::ostream& out, std::ostream& err,
               const std::string& axiom_include = kDefaultAxiomInclude);

// CLI entry shared by the three filter executables.
int filter_main(Dialect dialect, int argc, char** argv);

}  // namespace ogp::filters

#endif
