#pragma once

#include <optional>
#include <string>
#include <vector>

#include "tiledeform/linalg.hpp"

namespace tiledeform {

/// Integer polynomial, coefficient of x^i at index i. Empty == zero.
using IntPoly = std::vector<mpz_class>;
using RatPoly = std::vector<mpq_class>;

int degree(const IntPoly& p);
int degree(const RatPoly& p);
void trim(IntPoly& p);
void trim(RatPoly& p);

RatPoly to_rational(const IntPoly& p);
/// Scale to an integer polynomial with content 1 and positive leading coefficient.
IntPoly primitive_part(const RatPoly& p);
IntPoly primitive_part(const IntPoly& p);

RatPoly derivative(const RatPoly& p);
/// Quotient and remainder of polynomial division over Q.
std::pair<RatPoly, RatPoly> divmod(const RatPoly& num, const RatPoly& den);
RatPoly gcd(RatPoly a, RatPoly b);
/// Exact quotient a / b over Z, or nullopt if b does not divide a.
std::optional<IntPoly> divide_exact(const IntPoly& a, const IntPoly& b);
IntPoly multiply(const IntPoly& a, const IntPoly& b);

mpz_class evaluate(const IntPoly& p, const mpz_class& x);
Quad evaluate(const IntPoly& p, const Quad& x);
std::string to_string(const IntPoly& p);

/// Characteristic polynomial det(xI - A) by Faddeev-LeVerrier, exact over Q.
RatPoly characteristic_polynomial(const QMatrix& a);

/// p(A) evaluated exactly.
QMatrix evaluate(const IntPoly& p, const QMatrix& a);

IntPoly cyclotomic(int n);
/// Order n when p equals the n-th cyclotomic polynomial.
std::optional<int> cyclotomic_order(const IntPoly& p);
bool is_reciprocal(const IntPoly& p);

struct Factor {
  IntPoly poly;       // irreducible, primitive, positive leading coefficient
  int multiplicity = 1;
};

/// Complete factorization over Z of a nonzero polynomial (content dropped).
/// Factors are ordered by (degree, coefficients).
std::vector<Factor> factor(const IntPoly& p);

enum class RootClass { small, unit, large, unit_uncertain };
const char* to_string(RootClass c);

struct RootEnclosure {
  long double re = 0;
  long double im = 0;
  long double radius = 0;      // a root of the factor lies within this disc
  RootClass cls = RootClass::unit_uncertain;
  bool certified = false;       // enclosure separated from the unit circle, or unit proven
  int precision_bits = 0;       // precision at which the classification was settled
  long double modulus() const;
};

/// Isolate and classify every root of an irreducible integer polynomial.
/// Precision is raised adaptively until each enclosure separates from the
/// unit circle; cyclotomic factors are classified unit without refinement.
std::vector<RootEnclosure> isolate_roots(const IntPoly& irreducible);

/// Exact roots of a factor of degree <= 2 with real roots, ascending.
/// Returns an empty vector for complex-conjugate pairs or degree > 2.
std::vector<Quad> exact_real_roots(const IntPoly& p);

}  // namespace tiledeform
