#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tiledeform/cohomology.hpp"
#include "tiledeform/complex.hpp"
#include "tiledeform/substitution.hpp"

namespace tiledeform {

/// Everything the analyses share about one substitution system: the
/// collared complex, the substitution self-map, H^1 and the eigen data.
struct TilingSystem {
  std::string name;
  int dimension = 1;  // d of the tiling (coefficients live in R^d)
  std::optional<SubstitutionRule> rule;
  std::optional<Quad> stretch;

  std::optional<Approximant> approximant;  // built systems only
  std::shared_ptr<const CellComplex> gamma;  // Gamma(level) or the fixture complex
  CellularMap sigma;
  int level = 1;  // -1 for fixtures
  std::optional<Approximant> base;      // Gamma(0), built systems only
  std::optional<CellularMap> to_base;   // Gamma(level) -> Gamma(0)

  CohomologyPresentation h1;
  QMatrix sigma_star;
  EigenStructure eigen;

  json geometry;  // fixture pass-through
  json patch;
  std::vector<std::string> flags;

  /// Reduced-coordinate class of a closed level-`level` cochain.
  std::vector<Quad> reduced_class(const std::vector<Quad>& cochain) const;
  /// A closed cochain representing a reduced-coordinate class.
  std::vector<Quad> cochain_of(const std::vector<Quad>& reduced) const;
};

/// level 1 falls back to level 2 when the level-1 image is ambiguous.
TilingSystem build_system(const SubstitutionRule& rule, int level = 1);
TilingSystem build_system(const ComplexFixture& fixture);

/// Reads either a substitution document or a complex fixture document.
TilingSystem load_system(const json& document);

CellularMap compose(const CellularMap& second, const CellularMap& first);

}  // namespace tiledeform
