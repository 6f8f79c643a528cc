#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tiledeform/system.hpp"

namespace tiledeform {

enum class Admissible { yes, no, unchecked };
const char* to_string(Admissible a);

/// R^d-valued 1-cochain. level 0 lives on Gamma(0) of a built system; any
/// other level means the system's own complex (Gamma(1), Gamma(2) or the
/// fixture complex, level -1).
struct ShapeParameter {
  int level = 0;
  int dimension = 1;
  std::vector<std::vector<Quad>> values;  // values[cell][component]
  Admissible admissible = Admissible::unchecked;
};

const CellComplex& shape_complex(const ShapeParameter& f, const TilingSystem& s);

ShapeParameter natural_shape(const TilingSystem& s);
/// Float inputs are taken as the exact binary rationals they denote.
ShapeParameter parse_shape(const json& document, const TilingSystem& s);
json shape_to_json(const ShapeParameter& f, const TilingSystem& s);

struct AdmissibilityReport {
  bool closed = true;
  bool admissible = true;
  std::vector<std::string> diagnostics;
};

/// Checks closedness and geometric nondegeneracy; sets f.admissible.
AdmissibilityReport is_admissible(ShapeParameter& f, const TilingSystem& s);

/// Component cochains on the system's complex: out[component][cell].
std::vector<std::vector<Quad>> lift(const ShapeParameter& f, const TilingSystem& s);

struct DeformationClass {
  int level = 1;
  std::vector<std::vector<Quad>> coords;  // coords[component], reduced coordinates
};

DeformationClass i_map(const ShapeParameter& f, const TilingSystem& s);

struct CoboundaryWitness {
  int shifts = 0;  // substitution pullbacks applied before solving
  std::vector<std::vector<Quad>> beta;  // beta[component][vertex]
};

/// beta with (sigma^*)^shifts (f - g) = delta beta on the system's complex,
/// trying shifts = 0..max_shifts.
std::optional<CoboundaryWitness> coboundary_witness(const ShapeParameter& f, const ShapeParameter& g,
                                                    const TilingSystem& s, int max_shifts = 0);

enum class Relation { mld, conjugate, conjugate_up_to_linear, not_locally_conjugate, inconclusive };
const char* to_string(Relation r);

struct ClassifyOptions {
  int k_max = 6;
  double smallness = 1e-2;   // rung 4: |I(g) - I(f)| <= smallness * |I(f)|
  double tolerance = 1e-9;   // numeric membership tests
};

struct ClassificationReport {
  Relation relation = Relation::inconclusive;
  bool exact = true;
  double tolerance = 0;
  std::optional<CoboundaryWitness> beta;
  int shift = 0;
  int direction = 0;  // +1: I(g) - (sigma*)^k I(f) in S;  -1: I(f) - (sigma*)^k I(g) in S
  std::vector<std::vector<Quad>> linear;  // L, exact case
  std::vector<std::vector<double>> linear_numeric;
  double remainder_norm = 0;    // norm of the negligible remainder
  double difference_norm = 0;   // |I(g) - I(f)|
  double reference_norm = 0;    // |I(f)|
  double obstruction_norm = 0;  // component of the difference outside S
  std::string heuristic;
  std::vector<std::string> notes;
};

ClassificationReport classify_pair(const ShapeParameter& f, const ShapeParameter& g, const TilingSystem& s,
                                   const ClassifyOptions& options = {});

/// Exact membership of reduced vectors in S (numeric with tolerance when
/// the eigen data is numeric). norm_out receives the non-S norm.
bool in_negligible_space(const std::vector<Quad>& v, const TilingSystem& s, double tolerance, double* norm_out = nullptr);

struct DecayReport {
  std::vector<std::vector<double>> table;  // table[generator][n] = |beta(F^n v)|
  std::vector<std::optional<double>> ratios;
  std::optional<double> ratio;  // largest fitted ratio over generators
  int fit_from = 5;
  int fit_to = 25;
  bool in_s = false;
  double bound = 0;  // max small |lambda| + 0.05
  bool consistent = true;
};

/// Evaluates a reduced class on pushed-forward 1-cycles of the system's
/// complex and fits the geometric decay ratio over n = fit_from..n_max.
DecayReport negligibility_decay_check(const std::vector<Quad>& reduced_beta,
                                      const std::vector<std::vector<mpz_class>>& cycles, const TilingSystem& s,
                                      int n_max = 25, int fit_from = 5);

}  // namespace tiledeform
