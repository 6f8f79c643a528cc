#pragma once

#include <vector>

#include "tiledeform/linalg.hpp"

namespace tiledeform {

using ZMatrix = Matrix<mpz_class>;

struct SmithDecomposition {
  ZMatrix u;  // unimodular, rows x rows
  ZMatrix v;  // unimodular, cols x cols
  ZMatrix d;  // diagonal, d_i | d_{i+1}, d_i >= 0
  std::vector<mpz_class> diagonal() const;
  std::size_t rank() const;
  /// Diagonal entries greater than one (the torsion coefficients).
  std::vector<mpz_class> torsion() const;
};

/// Exact Smith normal form U*M*V = D. Pivot policy: smallest nonzero
/// absolute value, ties broken by (row, column) order.
SmithDecomposition smith_normal_form(const ZMatrix& m);

/// Diagonal of the Smith form only; skips accumulating U and V.
std::vector<mpz_class> smith_diagonal(const ZMatrix& m);

mpz_class determinant(const ZMatrix& m);

}  // namespace tiledeform
