#include "tiledeform/polynomial.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <sstream>

namespace tiledeform {

namespace mp = boost::multiprecision;

int degree(const IntPoly& p) {
  for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
    if (p[i] != 0) return i;
  return -1;
}

int degree(const RatPoly& p) {
  for (int i = static_cast<int>(p.size()) - 1; i >= 0; --i)
    if (p[i] != 0) return i;
  return -1;
}

void trim(IntPoly& p) { p.resize(static_cast<std::size_t>(degree(p) + 1)); }
void trim(RatPoly& p) { p.resize(static_cast<std::size_t>(degree(p) + 1)); }

RatPoly to_rational(const IntPoly& p) {
  RatPoly r;
  for (const auto& c : p) r.emplace_back(c);
  return r;
}

IntPoly primitive_part(const RatPoly& p) {
  RatPoly q = p;
  trim(q);
  if (q.empty()) return {};
  mpz_class den = 1;
  for (const auto& c : q) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), c.get_den_mpz_t());
  IntPoly r;
  for (const auto& c : q) r.push_back(mpz_class(c * den));
  return primitive_part(r);
}

IntPoly primitive_part(const IntPoly& p) {
  IntPoly r = p;
  trim(r);
  if (r.empty()) return r;
  mpz_class g = 0;
  for (const auto& c : r) mpz_gcd(g.get_mpz_t(), g.get_mpz_t(), c.get_mpz_t());
  const int s = sgn(r.back());
  for (auto& c : r) c = s * c / g;
  return r;
}

RatPoly derivative(const RatPoly& p) {
  RatPoly d;
  for (std::size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<long>(i));
  trim(d);
  return d;
}

std::pair<RatPoly, RatPoly> divmod(const RatPoly& num, const RatPoly& den) {
  RatPoly r = num;
  trim(r);
  RatPoly d = den;
  trim(d);
  if (d.empty()) throw std::domain_error("polynomial division by zero");
  const int dd = degree(d);
  RatPoly q(std::max(0, degree(r) - dd + 1), mpq_class(0));
  while (degree(r) >= dd) {
    const int shift = degree(r) - dd;
    const mpq_class c = r[degree(r)] / d[dd];
    q[shift] = c;
    for (int i = 0; i <= dd; ++i) r[i + shift] -= c * d[i];
    trim(r);
  }
  trim(q);
  return {q, r};
}

RatPoly gcd(RatPoly a, RatPoly b) {
  trim(a);
  trim(b);
  while (!b.empty()) {
    auto r = divmod(a, b).second;
    a = std::move(b);
    b = std::move(r);
  }
  if (!a.empty()) {
    const mpq_class lead = a.back();
    for (auto& c : a) c /= lead;
  }
  return a;
}

std::optional<IntPoly> divide_exact(const IntPoly& a, const IntPoly& b) {
  auto [q, r] = divmod(to_rational(a), to_rational(b));
  if (!r.empty()) return std::nullopt;
  IntPoly out;
  for (const auto& c : q) {
    if (c.get_den() != 1) return std::nullopt;
    out.push_back(c.get_num());
  }
  return out;
}

IntPoly multiply(const IntPoly& a, const IntPoly& b) {
  if (a.empty() || b.empty()) return {};
  IntPoly r(a.size() + b.size() - 1, mpz_class(0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
  trim(r);
  return r;
}

mpz_class evaluate(const IntPoly& p, const mpz_class& x) {
  mpz_class v = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + *it;
  return v;
}

Quad evaluate(const IntPoly& p, const Quad& x) {
  Quad v;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + Quad(*it);
  return v;
}

std::string to_string(const IntPoly& p) {
  std::ostringstream os;
  bool first = true;
  for (int i = degree(p); i >= 0; --i) {
    const mpz_class& c = p[i];
    if (c == 0) continue;
    mpz_class a = abs(c);
    if (first) {
      if (c < 0) os << '-';
    } else {
      os << (c < 0 ? " - " : " + ");
    }
    if (a != 1 || i == 0) os << a.get_str();
    if (i >= 1) os << 'x';
    if (i > 1) os << '^' << i;
    first = false;
  }
  if (first) os << '0';
  return os.str();
}

RatPoly characteristic_polynomial(const QMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("characteristic_polynomial: matrix not square");
  const std::size_t n = a.rows();
  RatPoly c(n + 1, mpq_class(0));
  c[n] = 1;
  QMatrix m(n, n);
  for (std::size_t k = 1; k <= n; ++k) {
    if (k > 1) m = a * m;
    for (std::size_t i = 0; i < n; ++i) m(i, i) += c[n - k + 1];
    const QMatrix am = a * m;
    mpq_class tr = 0;
    for (std::size_t i = 0; i < n; ++i) tr += am(i, i);
    c[n - k] = -tr / static_cast<long>(k);
  }
  return c;
}

QMatrix evaluate(const IntPoly& p, const QMatrix& a) {
  const std::size_t n = a.rows();
  QMatrix v(n, n);
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    v = v * a;
    for (std::size_t i = 0; i < n; ++i) v(i, i) += mpq_class(*it);
  }
  return v;
}

IntPoly cyclotomic(int n) {
  static std::map<int, IntPoly> cache;
  if (auto it = cache.find(n); it != cache.end()) return it->second;
  IntPoly p(static_cast<std::size_t>(n) + 1, mpz_class(0));
  p[0] = -1;
  p[n] = 1;
  for (int d = 1; d < n; ++d)
    if (n % d == 0) p = *divide_exact(p, cyclotomic(d));
  cache[n] = p;
  return p;
}

namespace {

int euler_phi(int n) {
  int result = n;
  for (int p = 2; p * p <= n; ++p)
    if (n % p == 0) {
      while (n % p == 0) n /= p;
      result -= result / p;
    }
  if (n > 1) result -= result / n;
  return result;
}

constexpr int kMaxCyclotomicOrder = 400;

}  // namespace

std::optional<int> cyclotomic_order(const IntPoly& p) {
  IntPoly q = primitive_part(p);
  const int deg = degree(q);
  if (deg < 1) return std::nullopt;
  for (int n = 1; n <= kMaxCyclotomicOrder; ++n)
    if (euler_phi(n) == deg && cyclotomic(n) == q) return n;
  return std::nullopt;
}

bool is_reciprocal(const IntPoly& p) {
  IntPoly q = p;
  trim(q);
  const std::size_t n = q.size();
  for (std::size_t i = 0; i < n; ++i)
    if (q[i] != q[n - 1 - i] && q[i] != -q[n - 1 - i]) return false;
  bool plus = true, minus = true;
  for (std::size_t i = 0; i < n; ++i) {
    plus = plus && q[i] == q[n - 1 - i];
    minus = minus && q[i] == -q[n - 1 - i];
  }
  return plus || minus;
}

namespace {

bool poly_less(const IntPoly& a, const IntPoly& b) {
  if (degree(a) != degree(b)) return degree(a) < degree(b);
  for (int i = degree(a); i >= 0; --i)
    if (a[i] != b[i]) return a[i] < b[i];
  return false;
}

std::vector<mpz_class> positive_divisors(mpz_class v) {
  v = abs(v);
  std::vector<std::pair<mpz_class, int>> primes;
  for (mpz_class p = 2; p * p <= v; ++p) {
    int e = 0;
    while (v % p == 0) {
      v /= p;
      ++e;
    }
    if (e) primes.emplace_back(p, e);
  }
  if (v > 1) primes.emplace_back(v, 1);
  std::vector<mpz_class> divs{1};
  for (const auto& [p, e] : primes) {
    const std::size_t base = divs.size();
    mpz_class pk = 1;
    for (int k = 1; k <= e; ++k) {
      pk *= p;
      for (std::size_t i = 0; i < base; ++i) divs.push_back(divs[i] * pk);
    }
  }
  return divs;
}

// Split off rational roots of a square-free primitive polynomial.
void extract_rational_roots(IntPoly& p, std::vector<IntPoly>& out) {
  bool changed = true;
  while (changed && degree(p) >= 1) {
    changed = false;
    if (p[0] == 0) {
      out.push_back({0, 1});
      p = *divide_exact(p, IntPoly{0, 1});
      changed = true;
      continue;
    }
    for (const auto& q : positive_divisors(p[degree(p)])) {
      for (const auto& r : positive_divisors(p[0])) {
        for (int s : {1, -1}) {
          IntPoly lin{-s * r, q};
          lin = primitive_part(lin);
          if (auto quot = divide_exact(p, lin)) {
            out.push_back(lin);
            p = *quot;
            changed = true;
            break;
          }
        }
        if (changed) break;
      }
      if (changed) break;
    }
  }
}

IntPoly interpolate(const std::vector<mpz_class>& xs, const std::vector<mpz_class>& ys) {
  const std::size_t n = xs.size();
  QMatrix v(n, n);
  std::vector<mpq_class> rhs(n);
  for (std::size_t i = 0; i < n; ++i) {
    mpq_class pw = 1;
    for (std::size_t j = 0; j < n; ++j) {
      v(i, j) = pw;
      pw *= xs[i];
    }
    rhs[i] = ys[i];
  }
  auto sol = solve(v, rhs);
  IntPoly out;
  for (const auto& c : *sol) {
    if (c.get_den() != 1) return {};
    out.push_back(c.get_num());
  }
  trim(out);
  return out;
}

constexpr std::size_t kKroneckerBudget = std::size_t{1} << 22;

// Kronecker's method: find a factor of degree m by interpolating through
// divisors of p at m+1 integer points.
std::optional<IntPoly> kronecker_factor(const IntPoly& p, int m) {
  std::vector<std::pair<std::size_t, mpz_class>> candidates;
  for (long x = -12; x <= 12; ++x) {
    const mpz_class v = evaluate(p, mpz_class(x));
    if (v != 0) candidates.emplace_back(positive_divisors(v).size(), mpz_class(x));
  }
  std::sort(candidates.begin(), candidates.end());
  if (candidates.size() < static_cast<std::size_t>(m + 1)) return std::nullopt;
  std::vector<mpz_class> xs;
  std::vector<std::vector<mpz_class>> choices;
  std::size_t combos = 1;
  for (int i = 0; i <= m; ++i) {
    xs.push_back(candidates[i].second);
    auto divs = positive_divisors(evaluate(p, xs.back()));
    std::vector<mpz_class> signed_divs;
    for (const auto& d : divs) {
      signed_divs.push_back(d);
      if (i > 0) signed_divs.push_back(-d);  // fix the sign of the first value
    }
    combos *= signed_divs.size();
    if (combos > kKroneckerBudget) throw std::runtime_error("factorization budget exceeded");
    choices.push_back(std::move(signed_divs));
  }
  std::vector<std::size_t> idx(xs.size(), 0);
  for (;;) {
    std::vector<mpz_class> ys;
    for (std::size_t i = 0; i < xs.size(); ++i) ys.push_back(choices[i][idx[i]]);
    IntPoly cand = interpolate(xs, ys);
    if (degree(cand) == m) {
      if (divide_exact(p, cand)) return primitive_part(cand);
    }
    std::size_t k = 0;
    while (k < idx.size() && ++idx[k] == choices[k].size()) idx[k++] = 0;
    if (k == idx.size()) break;
  }
  return std::nullopt;
}

void factor_square_free(IntPoly p, std::vector<IntPoly>& out) {
  p = primitive_part(p);
  if (degree(p) < 1) return;
  for (int n = 1; n <= kMaxCyclotomicOrder && degree(p) >= 1; ++n) {
    if (euler_phi(n) > degree(p)) continue;
    if (auto q = divide_exact(p, cyclotomic(n))) {
      out.push_back(cyclotomic(n));
      p = *q;
    }
  }
  extract_rational_roots(p, out);
  std::vector<IntPoly> stack{p};
  while (!stack.empty()) {
    IntPoly q = primitive_part(stack.back());
    stack.pop_back();
    const int deg = degree(q);
    if (deg < 1) continue;
    if (deg <= 3) {
      out.push_back(q);  // no rational roots left, so irreducible
      continue;
    }
    bool split = false;
    for (int m = 2; m <= deg / 2 && !split; ++m) {
      if (auto f = kronecker_factor(q, m)) {
        stack.push_back(*f);
        stack.push_back(*divide_exact(q, *f));
        split = true;
      }
    }
    if (!split) out.push_back(q);
  }
}

}  // namespace

std::vector<Factor> factor(const IntPoly& input) {
  IntPoly p = primitive_part(input);
  if (p.empty()) throw std::invalid_argument("factor: zero polynomial");
  // Yun's square-free decomposition over Q.
  std::vector<Factor> out;
  RatPoly f = to_rational(p);
  RatPoly fp = derivative(f);
  RatPoly a = gcd(f, fp);
  RatPoly b = divmod(f, a).first;
  RatPoly c = divmod(fp, a).first;
  RatPoly d;
  {
    RatPoly bp = derivative(b);
    d = c;
    for (std::size_t i = 0; i < bp.size(); ++i) {
      if (i >= d.size()) d.resize(i + 1, mpq_class(0));
      d[i] -= bp[i];
    }
    trim(d);
  }
  int mult = 1;
  while (degree(b) >= 1) {
    RatPoly g = gcd(b, d);
    if (degree(g) >= 1) {
      std::vector<IntPoly> parts;
      factor_square_free(primitive_part(g), parts);
      for (auto& q : parts) out.push_back({std::move(q), mult});
    }
    b = divmod(b, g).first;
    c = divmod(d, g).first;
    RatPoly bp = derivative(b);
    d = c;
    for (std::size_t i = 0; i < bp.size(); ++i) {
      if (i >= d.size()) d.resize(i + 1, mpq_class(0));
      d[i] -= bp[i];
    }
    trim(d);
    ++mult;
  }
  // Merge identical factors that surfaced at the same multiplicity.
  std::sort(out.begin(), out.end(), [](const Factor& x, const Factor& y) {
    if (poly_less(x.poly, y.poly)) return true;
    if (poly_less(y.poly, x.poly)) return false;
    return x.multiplicity < y.multiplicity;
  });
  return out;
}

const char* to_string(RootClass c) {
  switch (c) {
    case RootClass::small: return "small";
    case RootClass::unit: return "unit";
    case RootClass::large: return "large";
    case RootClass::unit_uncertain: return "unit?";
  }
  return "?";
}

long double RootEnclosure::modulus() const { return std::hypot(re, im); }

namespace {

template <typename R>
struct Cx {
  R re{0}, im{0};
  Cx() = default;
  Cx(R r, R i) : re(std::move(r)), im(std::move(i)) {}
  friend Cx operator+(const Cx& a, const Cx& b) { return {a.re + b.re, a.im + b.im}; }
  friend Cx operator-(const Cx& a, const Cx& b) { return {a.re - b.re, a.im - b.im}; }
  friend Cx operator*(const Cx& a, const Cx& b) {
    return {a.re * b.re - a.im * b.im, a.re * b.im + a.im * b.re};
  }
  friend Cx operator/(const Cx& a, const Cx& b) {
    R den = b.re * b.re + b.im * b.im;
    return {(a.re * b.re + a.im * b.im) / den, (a.im * b.re - a.re * b.im) / den};
  }
  R abs() const {
    using std::sqrt;
    return sqrt(re * re + im * im);
  }
};

template <typename R>
struct RootRun {
  std::vector<Cx<R>> z;
  std::vector<R> radius;
};

template <typename R>
R from_mpz(const mpz_class& x) {
  if constexpr (std::is_floating_point_v<R>) {
    return static_cast<R>(x.get_d());
  } else {
    return R(x.get_str());
  }
}

template <typename R>
RootRun<R> aberth(const IntPoly& p, const std::vector<std::pair<long double, long double>>& seed) {
  using std::cos;
  using std::sin;
  const int n = degree(p);
  std::vector<R> a;
  for (int i = 0; i <= n; ++i) a.push_back(from_mpz<R>(p[i]));
  const R eps = std::numeric_limits<R>::epsilon();
  std::vector<Cx<R>> z(n);
  if (static_cast<int>(seed.size()) == n) {
    for (int k = 0; k < n; ++k) z[k] = Cx<R>(R(seed[k].first), R(seed[k].second));
  } else {
    R bound = 0;
    for (int i = 0; i < n; ++i) {
      using std::abs;
      R q = abs(a[i] / a[n]);
      if (q > bound) bound = q;
    }
    bound = (bound + 1) / 2;
    const R two_pi = R(2) * boost::math::constants::pi<R>();
    for (int k = 0; k < n; ++k) {
      R ang = two_pi * k / n + R(0.4);
      z[k] = Cx<R>(bound * cos(ang), bound * sin(ang));
    }
  }
  auto eval = [&](const Cx<R>& x, Cx<R>& pv, Cx<R>& dv, R& mag) {
    pv = Cx<R>(a[n], R(0));
    dv = Cx<R>(R(0), R(0));
    R ax = x.abs();
    using std::abs;
    mag = abs(a[n]);
    for (int i = n - 1; i >= 0; --i) {
      dv = dv * x + pv;
      pv = pv * x + Cx<R>(a[i], R(0));
      mag = mag * ax + abs(a[i]);
    }
  };
  for (int iter = 0; iter < 800; ++iter) {
    R worst = 0;
    for (int k = 0; k < n; ++k) {
      Cx<R> pv, dv;
      R mag;
      eval(z[k], pv, dv, mag);
      if (pv.abs() == 0) continue;
      Cx<R> w = pv / dv;
      Cx<R> s(R(0), R(0));
      for (int j = 0; j < n; ++j)
        if (j != k) s = s + Cx<R>(R(1), R(0)) / (z[k] - z[j]);
      Cx<R> step = w / (Cx<R>(R(1), R(0)) - w * s);
      z[k] = z[k] - step;
      R rel = step.abs() / (z[k].abs() + R(1));
      if (rel > worst) worst = rel;
    }
    if (worst < eps * 16) break;
  }
  RootRun<R> run;
  run.z = z;
  for (int k = 0; k < n; ++k) {
    Cx<R> pv, dv;
    R mag;
    eval(z[k], pv, dv, mag);
    R err = R(8) * n * eps * mag;
    R dabs = dv.abs();
    R r = dabs == 0 ? R(1e30) : R(n) * (pv.abs() + err) / dabs;
    run.radius.push_back(r);
  }
  return run;
}

// Classify from a run; returns true when every root is settled.
template <typename R>
bool classify_run(const IntPoly& p, const RootRun<R>& run, int bits, std::vector<RootEnclosure>& out) {
  const std::size_t n = run.z.size();
  out.assign(n, RootEnclosure{});
  bool disjoint = true;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if ((run.z[i] - run.z[j]).abs() <= run.radius[i] + run.radius[j]) disjoint = false;
  const bool reciprocal = is_reciprocal(p);
  bool settled = true;
  for (std::size_t i = 0; i < n; ++i) {
    RootEnclosure& e = out[i];
    e.re = static_cast<long double>(run.z[i].re);
    e.im = static_cast<long double>(run.z[i].im);
    e.radius = static_cast<long double>(run.radius[i]);
    e.precision_bits = bits;
    const R m = run.z[i].abs();
    const R r = run.radius[i];
    if (disjoint && m - r > 1) {
      e.cls = RootClass::large;
      e.certified = true;
    } else if (disjoint && m + r < 1) {
      e.cls = RootClass::small;
      e.certified = true;
    } else if (disjoint && reciprocal) {
      // Off the circle, 1/conj(z) would be a different root; on it, z itself.
      Cx<R> w(run.z[i].re / (m * m), run.z[i].im / (m * m));
      if ((w - run.z[i]).abs() <= r) {
        e.cls = RootClass::unit;
        e.certified = true;
      } else {
        settled = false;
      }
    } else {
      settled = false;
    }
  }
  return settled;
}

template <typename R>
std::vector<std::pair<long double, long double>> seeds_of(const RootRun<R>& run) {
  std::vector<std::pair<long double, long double>> s;
  for (const auto& z : run.z) s.emplace_back(static_cast<long double>(z.re), static_cast<long double>(z.im));
  return s;
}

}  // namespace

std::vector<RootEnclosure> isolate_roots(const IntPoly& irreducible) {
  const IntPoly p = primitive_part(irreducible);
  const int n = degree(p);
  if (n < 1) return {};
  std::vector<RootEnclosure> out;
  if (n == 1) {
    RootEnclosure e;
    mpq_class r(-p[0], p[1]);
    r.canonicalize();
    e.re = r.get_d();
    e.radius = 0;
    e.certified = true;
    e.precision_bits = 0;
    const mpq_class a = abs(r);
    e.cls = a < 1 ? RootClass::small : (a > 1 ? RootClass::large : RootClass::unit);
    return {e};
  }
  const bool cyclotomic_factor = cyclotomic_order(p).has_value();

  auto run_ld = aberth<long double>(p, {});
  if (classify_run(p, run_ld, 64, out) && !cyclotomic_factor) return out;
  using F50 = mp::cpp_bin_float_50;
  using F100 = mp::cpp_bin_float_100;
  using F250 = mp::number<mp::cpp_bin_float<250>>;
  auto run50 = aberth<F50>(p, seeds_of(run_ld));
  bool ok = classify_run(p, run50, 166, out);
  if (!ok && !cyclotomic_factor) {
    auto run100 = aberth<F100>(p, seeds_of(run50));
    ok = classify_run(p, run100, 332, out);
    if (!ok) {
      auto run250 = aberth<F250>(p, seeds_of(run100));
      ok = classify_run(p, run250, 830, out);
    }
  }
  if (cyclotomic_factor) {
    for (auto& e : out) {
      e.cls = RootClass::unit;
      e.certified = true;
    }
    return out;
  }
  for (auto& e : out)
    if (!e.certified) e.cls = RootClass::unit_uncertain;
  return out;
}

std::vector<Quad> exact_real_roots(const IntPoly& input) {
  IntPoly p = primitive_part(input);
  const int deg = degree(p);
  if (deg == 1) {
    mpq_class r(-p[0], p[1]);
    r.canonicalize();
    return {Quad(r)};
  }
  if (deg != 2) return {};
  const mpz_class disc = p[1] * p[1] - 4 * p[2] * p[0];
  if (disc < 0) return {};
  if (disc == 0) {
    mpq_class b(-p[1], 2 * p[2]);
    b.canonicalize();
    Quad r(b);
    return {r, r};
  }
  auto [d, s] = square_free_decompose(disc);
  mpq_class base(-p[1], 2 * p[2]);
  mpq_class off(s, 2 * p[2]);
  base.canonicalize();
  off.canonicalize();
  Quad r1(base, -abs(off), d);
  Quad r2(base, abs(off), d);
  return {r1, r2};
}

}  // namespace tiledeform
