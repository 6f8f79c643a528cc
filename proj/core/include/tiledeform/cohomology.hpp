#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tiledeform/complex.hpp"
#include "tiledeform/polynomial.hpp"

namespace tiledeform {

/// Rational cohomology of a cell complex in one degree, plus the integral
/// torsion read off the Smith form of the incoming boundary.
struct CohomologyPresentation {
  int degree = 0;
  std::size_t cochains = 0;  // |C^p|
  std::size_t rank = 0;
  std::vector<mpz_class> torsion;
  QMatrix cocycle_basis;   // cochains x rank, closed, primitive integer columns
  QMatrix coordinate_map;  // rank x cochains; exact on cocycles, kills coboundaries
  QMatrix coboundary_in;   // delta^{p-1}: C^{p-1} -> C^p
  QMatrix coboundary_out;  // delta^p: C^p -> C^{p+1}

  bool is_closed(const std::vector<Quad>& cochain) const;
  /// Class coordinates; throws std::invalid_argument on a non-closed cochain.
  std::vector<Quad> coordinates(const std::vector<Quad>& cochain) const;
  std::vector<mpq_class> coordinates(const std::vector<mpq_class>& cochain) const;
  /// A (p-1)-cochain b with delta b = cochain, if one exists.
  std::optional<std::vector<Quad>> coboundary_witness(const std::vector<Quad>& cochain) const;
};

CohomologyPresentation cohomology(const CellComplex& complex, int p);

/// Matrix of the pullback f* : H^p(target) -> H^p(source) in the two
/// presentations' bases. Columns are images of target basis classes.
QMatrix induced_map(const CellularMap& f, const CohomologyPresentation& source,
                    const CohomologyPresentation& target);

/// Finite model of the direct limit: H / (generalized 0-eigenspace),
/// realized on the invariant complement im(M^n).
struct ReducedPresentation {
  std::size_t full_dimension = 0;
  QMatrix matrix;        // r x r, invertible
  QMatrix to_reduced;    // r x n, projection along the zero space
  QMatrix from_reduced;  // n x r, basis of im(M^n)
  QMatrix zero_basis;    // n x z, basis of ker(M^n)
  std::size_t rank() const { return matrix.rows(); }
};

ReducedPresentation quotient_by_zero_eigenspace(const QMatrix& m);

enum class PartKind { small, unit, large_pf, large_other };
const char* to_string(PartKind k);

struct EigenRoot {
  std::size_t factor = 0;
  RootEnclosure enclosure;
  std::optional<Quad> exact;
  int multiplicity = 1;  // algebraic, scalar coefficients
  bool is_pf = false;
  bool pf_conjugate = false;  // shares the minimal polynomial of lambda_PF (itself included)
};

/// One generalized eigenspace block of the reduced matrix: all roots of
/// one irreducible factor falling in one class (the PF root on its own).
struct EigenPart {
  PartKind kind = PartKind::small;
  std::size_t factor = 0;
  std::vector<std::size_t> roots;
  std::size_t dim = 0;
  bool exact = true;
  QuadMatrix basis;  // r x dim, when exact
  DMatrix numeric;   // r x dim, always filled
  double residual = 0;  // numeric invariance residual, relative
};

enum class Subspace { S, PF, unit, large, large_other };
const char* to_string(Subspace s);

struct EigenStructure {
  IntPoly char_poly;
  std::vector<Factor> factors;
  std::vector<EigenRoot> roots;
  std::size_t dimension = 0;
  std::size_t zero_multiplicity = 0;
  int coefficient_dimension = 1;  // d; multiplicities over R^d scale by d
  std::optional<std::size_t> pf_root;
  std::size_t d_b = 0;   // scalar coefficients, with multiplicity
  std::size_t b_pf = 0;
  std::size_t s_pf = 0;
  std::vector<std::string> flags;

  ReducedPresentation reduced;
  std::vector<EigenPart> parts;
  bool exact = true;        // every part exact in a single quadratic field
  QuadMatrix basis;         // concatenated part bases (exact case)
  QuadMatrix basis_inverse;
  DMatrix numeric_basis;
  DMatrix numeric_inverse;
  double condition = 1;

  std::size_t dim(Subspace s) const;
  bool in(Subspace s, const EigenPart& part) const;
};

/// Full eigen analysis of an induced matrix. stretch, when known, pins the
/// PF root exactly; otherwise the largest positive real root is used.
EigenStructure eigen_structure(const QMatrix& m, const std::optional<Quad>& stretch = std::nullopt,
                               int coefficient_dimension = 1);

struct Projection {
  bool exact = true;
  std::vector<Quad> value;     // exact case
  std::vector<double> numeric;  // always
};

/// Component of a reduced-coordinate vector in one subspace.
Projection subspace_project(const std::vector<Quad>& v, const EigenStructure& e, Subspace which);
Projection subspace_project(const std::vector<double>& v, const EigenStructure& e, Subspace which);

/// Coefficients of v in the concatenated part basis.
std::optional<std::vector<Quad>> part_coefficients(const std::vector<Quad>& v, const EigenStructure& e);

std::vector<Quad> apply(const QMatrix& m, const std::vector<Quad>& v);
std::vector<Quad> apply(const QuadMatrix& m, const std::vector<Quad>& v);
std::vector<double> apply(const DMatrix& m, const std::vector<double>& v);
std::vector<double> to_double(const std::vector<Quad>& v);

}  // namespace tiledeform
