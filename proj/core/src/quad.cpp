#include "tiledeform/quad.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace tiledeform {

bool is_square_free(long d) {
  if (d <= 0) return false;
  for (long p = 2; p * p <= d; ++p) {
    if (d % (p * p) == 0) return false;
  }
  return true;
}

std::pair<long, mpz_class> square_free_decompose(const mpz_class& n) {
  if (n <= 0) throw std::invalid_argument("square_free_decompose: n must be positive");
  mpz_class rest = n;
  mpz_class cofactor = 1;
  mpz_class free_part = 1;
  for (mpz_class p = 2; p * p <= rest; ++p) {
    while (rest % (p * p) == 0) {
      rest /= p * p;
      cofactor *= p;
    }
    if (rest % p == 0) {
      rest /= p;
      free_part *= p;
    }
  }
  free_part *= rest;
  if (!free_part.fits_slong_p()) throw std::overflow_error("square-free part too large");
  return {free_part.get_si(), cofactor};
}

Quad::Quad(mpq_class a, mpq_class b, long d) : a_(std::move(a)), b_(std::move(b)), d_(d) {
  a_.canonicalize();
  b_.canonicalize();
  if (!is_square_free(d_)) throw std::invalid_argument("Quad: radicand must be positive and square-free");
  if (d_ == 1) {
    a_ += b_;
    b_ = 0;
  }
  normalize();
}

Quad Quad::sqrt_of(long d) { return Quad(mpq_class(0), mpq_class(1), d); }

void Quad::normalize() {
  if (b_ == 0) d_ = 1;
}

long Quad::common_radicand(const Quad& x, const Quad& y) {
  if (x.b_ == 0) return y.d_;
  if (y.b_ == 0) return x.d_;
  if (x.d_ != y.d_) {
    throw FieldMismatch("mixing Q(sqrt " + std::to_string(x.d_) + ") with Q(sqrt " +
                        std::to_string(y.d_) + ")");
  }
  return x.d_;
}

Quad Quad::conjugate() const {
  Quad r = *this;
  r.b_ = -r.b_;
  return r;
}

mpq_class Quad::norm() const { return a_ * a_ - d_ * b_ * b_; }

int Quad::sign() const {
  const int sa = sgn(a_);
  const int sb = sgn(b_);
  if (sb == 0) return sa;
  if (sa == 0) return sb;
  if (sa == sb) return sa;
  const mpq_class lhs = a_ * a_;
  const mpq_class rhs = b_ * b_ * d_;
  if (lhs > rhs) return sa;
  if (lhs < rhs) return sb;
  return 0;
}

double Quad::to_double() const { return static_cast<double>(to_long_double()); }

long double Quad::to_long_double() const {
  const long double root = std::sqrt(static_cast<long double>(d_));
  const long double a = a_.get_d();
  const long double b = static_cast<long double>(b_.get_d()) * root;
  if (sgn(a_) * sgn(b_) >= 0) return a + b;
  // Opposite signs: a + b sqrt D = norm / (a - b sqrt D) avoids cancellation.
  return static_cast<long double>(norm().get_d()) / (a - b);
}

std::string Quad::str() const {
  std::ostringstream os;
  os << *this;
  return os.str();
}

Quad Quad::operator-() const {
  Quad r = *this;
  r.a_ = -r.a_;
  r.b_ = -r.b_;
  return r;
}

Quad& Quad::operator+=(const Quad& o) {
  d_ = common_radicand(*this, o);
  a_ += o.a_;
  b_ += o.b_;
  normalize();
  return *this;
}

Quad& Quad::operator-=(const Quad& o) {
  d_ = common_radicand(*this, o);
  a_ -= o.a_;
  b_ -= o.b_;
  normalize();
  return *this;
}

Quad& Quad::operator*=(const Quad& o) {
  const long d = common_radicand(*this, o);
  mpq_class na = a_ * o.a_ + d * b_ * o.b_;
  mpq_class nb = a_ * o.b_ + b_ * o.a_;
  a_ = std::move(na);
  b_ = std::move(nb);
  d_ = d;
  normalize();
  return *this;
}

Quad& Quad::operator/=(const Quad& o) {
  if (o.is_zero()) throw std::domain_error("Quad: division by zero");
  const mpq_class n = o.norm();
  *this *= o.conjugate();
  a_ /= n;
  b_ /= n;
  normalize();
  return *this;
}

bool operator==(const Quad& x, const Quad& y) {
  return x.a_ == y.a_ && x.b_ == y.b_ && (x.b_ == 0 || x.d_ == y.d_);
}

std::strong_ordering operator<=>(const Quad& x, const Quad& y) {
  const int s = (x - y).sign();
  if (s < 0) return std::strong_ordering::less;
  if (s > 0) return std::strong_ordering::greater;
  return std::strong_ordering::equal;
}

std::ostream& operator<<(std::ostream& os, const Quad& q) {
  if (q.is_rational()) return os << q.rational_part().get_str();
  if (q.rational_part() != 0) os << q.rational_part().get_str() << '+';
  return os << q.irrational_part().get_str() << "*sqrt(" << q.radicand() << ')';
}

}  // namespace tiledeform
