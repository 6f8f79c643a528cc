#pragma once

#include <gmpxx.h>

#include <compare>
#include <iosfwd>
#include <stdexcept>
#include <string>

namespace tiledeform {

/// Exact element a + b*sqrt(D) of the quadratic field Q(sqrt D).
///
/// D is square-free and positive. Rational values carry b == 0 and are
/// normalized to D == 1 so they mix freely with any field. Mixing two
/// genuinely irrational values from different fields throws.
class Quad {
 public:
  Quad() : a_(0), b_(0), d_(1) {}
  Quad(long v) : a_(v), b_(0), d_(1) {}  // NOLINT(google-explicit-constructor)
  Quad(const mpq_class& v) : a_(v), b_(0), d_(1) { a_.canonicalize(); }  // NOLINT
  Quad(const mpz_class& v) : a_(v), b_(0), d_(1) {}  // NOLINT
  Quad(mpq_class a, mpq_class b, long d);

  static Quad sqrt_of(long d);  // sqrt(d) for square-free d

  const mpq_class& rational_part() const { return a_; }
  const mpq_class& irrational_part() const { return b_; }
  long radicand() const { return d_; }
  bool is_rational() const { return b_ == 0; }
  bool is_zero() const { return a_ == 0 && b_ == 0; }

  Quad conjugate() const;
  mpq_class norm() const;  // a^2 - D b^2
  int sign() const;
  Quad abs() const { return sign() < 0 ? -*this : *this; }

  double to_double() const;
  long double to_long_double() const;
  std::string str() const;

  Quad operator-() const;
  Quad& operator+=(const Quad& o);
  Quad& operator-=(const Quad& o);
  Quad& operator*=(const Quad& o);
  Quad& operator/=(const Quad& o);

  friend Quad operator+(Quad x, const Quad& y) { return x += y; }
  friend Quad operator-(Quad x, const Quad& y) { return x -= y; }
  friend Quad operator*(Quad x, const Quad& y) { return x *= y; }
  friend Quad operator/(Quad x, const Quad& y) { return x /= y; }

  friend bool operator==(const Quad& x, const Quad& y);
  friend std::strong_ordering operator<=>(const Quad& x, const Quad& y);

 private:
  void normalize();
  static long common_radicand(const Quad& x, const Quad& y);

  mpq_class a_;
  mpq_class b_;
  long d_;
};

std::ostream& operator<<(std::ostream& os, const Quad& q);

bool is_square_free(long d);

/// Square-free part s of n > 0 together with the cofactor c, n = c^2 * s.
std::pair<long, mpz_class> square_free_decompose(const mpz_class& n);

inline bool is_zero(const Quad& q) { return q.is_zero(); }
inline bool is_zero(const mpq_class& q) { return sgn(q) == 0; }
inline bool is_zero(const mpz_class& q) { return sgn(q) == 0; }
inline bool is_zero(double x) { return x == 0.0; }

class FieldMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace tiledeform
