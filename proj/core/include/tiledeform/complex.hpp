#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tiledeform/json_io.hpp"
#include "tiledeform/smith.hpp"
#include "tiledeform/substitution.hpp"

namespace tiledeform {

struct Cell {
  int dim = 0;
  std::string id;
  std::string origin;  // "<collared tile>/<face>" for built complexes, fixture label otherwise
};

struct CellComplex {
  std::string name;
  int dimension = 0;
  std::vector<std::vector<Cell>> cells;  // cells[p], p = 0..dimension
  std::vector<ZMatrix> boundary;         // boundary[p]: C_p -> C_{p-1}; boundary[0] is 0 x |C_0|
  int level = -1;                        // collaring depth, -1 for fixtures
  /// d == 2: boundary of each 2-cell as an ordered cycle of signed edges,
  /// empty when the order is unknown.
  std::vector<std::vector<std::pair<std::size_t, int>>> cycles;

  std::size_t count(int p) const { return p < 0 || p > dimension ? 0 : cells[p].size(); }
  std::size_t index_of(int p, const std::string& id) const;
};

struct CellularMap {
  std::shared_ptr<const CellComplex> source;
  std::shared_ptr<const CellComplex> target;
  std::vector<ZMatrix> chain;  // chain[p]: column j is the image of source p-cell j
};

/// Index of the first p with boundary[p-1]*boundary[p] != 0, or nullopt.
std::optional<int> boundary_defect(const CellComplex& c);
/// Index of the first p with boundary*chain != chain*boundary, or nullopt.
std::optional<int> commutation_defect(const CellularMap& f);

struct CollaredPrototile {
  std::size_t center = 0;  // prototile index
  int level = 0;
  std::string encoding;    // canonical; also the id of the top cell
  std::string parent;      // encoding one collar level down (empty at level 0)
};

struct Stabilization {
  bool saturated = false;  // rounds n, n+1, n+2 agreed
  int rounds = 0;          // last iteration depth examined
  std::size_t placements = 0;
  std::string note;        // why saturation failed, if it did
};

class ComplexError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AmbiguousImage : public ComplexError {
 public:
  using ComplexError::ComplexError;
};

struct Approximant {
  std::shared_ptr<const CellComplex> complex;
  std::vector<CollaredPrototile> tiles;  // aligned with complex->cells[dimension]
  Stabilization stabilization;
  /// faces[t][p][f] = index of the p-cell that face f of tile t is glued to.
  std::vector<std::vector<std::vector<std::size_t>>> faces;
};

std::vector<CollaredPrototile> enumerate_collared_prototiles(const SubstitutionRule& rule, int k,
                                                             Stabilization* info = nullptr);
Approximant build_approximant(const SubstitutionRule& rule, int k);
CellComplex build_gamma(const SubstitutionRule& rule, int k);

/// Gamma(k+1) -> Gamma(k), forgetting the outermost collar.
CellularMap forgetful_map(const SubstitutionRule& rule, int k);
CellularMap forgetful_map(const Approximant& finer, const Approximant& coarser);

struct SelfMap {
  CellularMap map;
  Approximant approximant;
  int level = 1;
};

/// Map of Gamma(k) to itself induced by the substitution. With retry, an
/// ambiguous image at level 1 triggers a rebuild at level 2.
SelfMap substitution_self_map(const SubstitutionRule& rule, int k = 1, bool retry = true);

struct ComplexFixture {
  std::shared_ptr<const CellComplex> complex;
  CellularMap map;
  std::optional<Quad> stretch;
  json geometry;  // passed through untouched, may be null
  json patch;
};

ComplexFixture load_complex_fixture(const json& document);
json complex_to_json(const CellComplex& c);
json chain_map_to_json(const CellularMap& f);
json fixture_to_json(const ComplexFixture& f);

}  // namespace tiledeform
