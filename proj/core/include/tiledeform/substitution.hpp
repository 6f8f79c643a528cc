#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "tiledeform/json_io.hpp"
#include "tiledeform/quad.hpp"

namespace tiledeform {

struct Vec2i {
  long x = 0;
  long y = 0;
  friend auto operator<=>(const Vec2i&, const Vec2i&) = default;
  friend Vec2i operator+(Vec2i a, Vec2i b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2i operator-(Vec2i a, Vec2i b) { return {a.x - b.x, a.y - b.y}; }
  Vec2i scaled(long k) const { return {x * k, y * k}; }
};

/// Unit edge of a polyomino boundary: from `start` one step along `dir`.
struct UnitEdge {
  Vec2i start;
  Vec2i dir;  // one of (1,0), (0,1), (-1,0), (0,-1)
  friend auto operator<=>(const UnitEdge&, const UnitEdge&) = default;
};

struct Prototile {
  std::string id;
  int dim = 1;
  Quad length;                    // d == 1
  std::vector<Vec2i> cells;       // d == 2: unit squares [x,x+1]x[y,y+1], sorted
  std::vector<UnitEdge> boundary;  // d == 2: counter-clockwise boundary cycle
};

struct Placement {
  std::size_t tile = 0;
  Quad x;
  Quad y;
};

struct Patch {
  std::vector<Placement> placements;
  std::size_t size() const { return placements.size(); }
};

enum class SubstitutionMode { exact_self_similar, amalgamation };

struct SubstitutionRule {
  std::string name;
  int dimension = 1;
  Quad stretch;
  std::vector<Prototile> prototiles;
  /// images[j] = sigma(prototile j), offsets relative to the origin of lambda*t_j.
  std::vector<Patch> images;
  SubstitutionMode mode = SubstitutionMode::exact_self_similar;
  bool aperiodic_assertion = false;

  std::vector<std::vector<long>> matrix;  // M_s[i][j] = #t_i in sigma(t_j)
  double diameter = 0;                     // largest prototile diameter

  std::size_t index_of(const std::string& id) const;
  std::size_t size() const { return prototiles.size(); }
  long integer_stretch() const;  // throws unless lambda is a positive integer
};

/// Parses and schema-checks a substitution document; derived fields are
/// populated. Geometric consistency is checked separately by validate_rule.
SubstitutionRule parse_substitution(const json& document);
SubstitutionRule parse_substitution_text(const std::string& text);
json substitution_to_json(const SubstitutionRule& rule);

struct TileCheck {
  std::string tile;
  std::string status;  // exact-cover | asserted-cover | overlap | gap | length-mismatch
  std::string detail;
};

struct ValidationReport {
  bool valid = true;
  std::vector<TileCheck> tiles;
};

ValidationReport validate_rule(const SubstitutionRule& rule);

std::vector<std::vector<long>> substitution_matrix(const SubstitutionRule& rule);

enum class PrimitivityStatus { primitive, not_primitive, indeterminate };

struct PrimitivityResult {
  PrimitivityStatus status = PrimitivityStatus::indeterminate;
  int power = 0;                               // least n with M^n > 0 when primitive
  std::vector<std::vector<bool>> stable_zero_pattern;  // positivity pattern that recurs; its false entries never fill
};

PrimitivityResult is_primitive(const SubstitutionRule& rule, int n_max = 64);

inline constexpr std::size_t kDefaultPlacementCap = 10'000'000;

class ResourceCapExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One substitution step applied to a patch. parents, when given, receives
/// the index of the source placement of every output placement.
Patch substitute(const SubstitutionRule& rule, const Patch& patch, std::vector<std::size_t>* parents = nullptr,
                 std::size_t cap = kDefaultPlacementCap);

Patch iterate_patch(const SubstitutionRule& rule, std::size_t tile, int n, std::size_t cap = kDefaultPlacementCap);

struct FixedPointSeed {
  std::size_t tile = 0;
  int power = 0;
  std::size_t placement = 0;  // index into iterate_patch(tile, power)
};

/// Smallest power p (then first tile, then first placement) such that
/// sigma^p(t) has a copy of t strictly inside lambda^p * t.
std::optional<FixedPointSeed> seed_fixed_point(const SubstitutionRule& rule, int p_max = 16);

/// Polyomino helpers.
std::vector<UnitEdge> polyomino_boundary(const std::vector<Vec2i>& cells);
long to_long(const Quad& q);

}  // namespace tiledeform
