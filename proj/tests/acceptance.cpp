// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>

#include "tiledeform/render.hpp"
#include "tiledeform/spectrum.hpp"

using namespace tiledeform;

namespace {

// pinned tolerances
constexpr double kRootTol = 1e-9;
constexpr double kRatioSlack = 0.10;  // relative
constexpr double kShiftTol = 1e-9;
constexpr double kTraceOracleTol = 1e-9;
constexpr int kRandomPairs = 100;
constexpr int kRandomBetas = 100;

std::mt19937_64 rng(7321);
long uniform(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng); }

json doc(const std::string& name) {
  std::ifstream in(std::string(TILEDEFORM_FIXTURE_DIR) + "/" + name + ".json");
  if (!in) throw std::runtime_error("missing fixture " + name);
  return json::parse(in);
}

const TilingSystem& sys(const std::string& name) {
  static std::map<std::string, TilingSystem> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, load_system(doc(name))).first;
  return it->second;
}

const RecurrenceLattice& lattice(const std::string& name) {
  static std::map<std::string, RecurrenceLattice> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, saturated_lattice(sys(name))).first;
  return it->second;
}

// collects failed checks of one criterion
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok) failures.push_back(what);
  }
};

IntPoly to_int(const RatPoly& p) {
  IntPoly out;
  for (const auto& c : p) out.push_back(c.get_num());
  return out;
}

std::vector<Quad> part_vector(const EigenStructure& e, PartKind kind) {
  for (const auto& part : e.parts)
    if (part.kind == kind && part.exact) return part.basis.column(0);
  return {};
}

ShapeParameter plus_coboundary(const ShapeParameter& f, const TilingSystem& s, const std::vector<std::vector<Quad>>& beta,
                               long sign) {
  const CellComplex& c = shape_complex(f, s);
  ShapeParameter g = f;
  g.admissible = Admissible::unchecked;
  for (std::size_t e = 0; e < c.count(1); ++e)
    for (std::size_t v = 0; v < c.count(0); ++v)
      for (int k = 0; k < f.dimension; ++k) g.values[e][k] += Quad(sign * c.boundary[1](v, e).get_si()) * beta[v][k];
  return g;
}

double frac_distance(const Quad& x) {
  mpf_class a(x.rational_part(), 512), b(x.irrational_part(), 512), r(x.radicand(), 512);
  mpf_class v(0, 512), fl(0, 512), d(0, 512);
  v = a + b * sqrt(r);
  fl = floor(v);
  d = v - fl;
  const double f = d.get_d();
  return std::min(f, 1.0 - f);
}

// geometric rate over the last `window` nonzero terms
std::optional<double> fitted_rate(const std::vector<double>& t, int window = 10) {
  if (static_cast<int>(t.size()) <= window) return std::nullopt;
  const std::size_t hi = t.size() - 1, lo = hi - window;
  if (t[lo] <= 0 || t[hi] <= 0) return std::nullopt;
  return std::pow(t[hi] / t[lo], 1.0 / window);
}

// ----------------------------------------------------------------------

Check thue_morse_pipeline() {
  Check c;
  const auto& s = sys("thue_morse");
  c.expect(s.rule->matrix == std::vector<std::vector<long>>{{1, 1}, {1, 1}}, "M_s");
  ZMatrix ms(2, 2);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) ms(i, j) = s.rule->matrix[i][j];
  c.expect(to_int(characteristic_polynomial(ms.cast<mpq_class>())) == IntPoly{0, -2, 1}, "M_s eigenvalues {2, 0}");
  const auto h1 = cohomology(*s.gamma, 1);
  const auto snf = smith_normal_form(s.gamma->boundary[1]);
  c.expect(s.gamma->count(1) - snf.rank() == 3, "H_1(Gamma1) rank 3 from the Smith form");
  c.expect(h1.rank == 3, "H^1 rank 3");
  c.expect(s.eigen.char_poly == IntPoly{0, -2, -1, 1}, "sigma* eigenvalues {2, -1, 0}");
  c.expect(to_int(characteristic_polynomial(s.eigen.reduced.matrix)) == IntPoly{-2, -1, 1}, "reduced spectrum {2, -1}");
  return c;
}

Check penrose_multiplicities() {
  Check c;
  const auto& e = sys("penrose_gamma1").eigen;
  const int d = e.coefficient_dimension;
  c.expect(d == 2, "coefficients in R^2");
  c.expect(e.reduced.rank() * d == 10, "H^1(T, R^2) dimension 10");
  const double tau = (1 + std::sqrt(5.0)) / 2;
  int m_tau = 0, m_small = 0, m_minus = 0;
  for (const auto& r : e.roots) {
    const double x = r.exact ? r.exact->to_double() : static_cast<double>(r.enclosure.re);
    const int m = r.multiplicity * d;
    if (std::abs(x - tau) <= kRootTol) m_tau += m;
    else if (std::abs(x - (1 - tau)) <= kRootTol) m_small += m;
    else if (std::abs(x + 1) <= kRootTol) m_minus += m;
    else c.failures.push_back("unexpected root " + std::to_string(x));
  }
  c.expect(m_tau == 4, "tau multiplicity 4");
  c.expect(m_small == 4, "1 - tau multiplicity 4");
  c.expect(m_minus == 2, "-1 multiplicity 2");
  return c;
}

Check fibonacci_classification() {
  Check c;
  const auto& s = sys("fibonacci");
  const auto f = natural_shape(s);
  c.expect(classify_pair(f, f, s).relation == Relation::mld, "(f, f) is MLD");
  for (int i = 0; i < kRandomPairs; ++i) {
    mpq_class a{uniform(1, 60), uniform(1, 20)}, b{uniform(1, 60), uniform(1, 20)};
    a.canonicalize();
    b.canonicalize();
    ShapeParameter g = parse_shape(json{{"level", 0}, {"values", {{"a", a.get_str()}, {"b", b.get_str()}}}}, s);
    if (!is_admissible(g, s).admissible) {
      c.failures.push_back("random pair not admissible");
      continue;
    }
    const auto r = classify_pair(f, g, s);
    if (r.relation != Relation::conjugate_up_to_linear || !r.exact)
      c.failures.push_back(std::string("(") + a.get_str() + ", " + b.get_str() + ") gave " + to_string(r.relation));
  }
  return c;
}

Check coboundary_suite() {
  Check c;
  for (const char* name : {"fibonacci", "thue_morse", "circle"}) {
    const auto& s = sys(name);
    const auto f = natural_shape(s);
    const CellComplex& cx = shape_complex(f, s);
    const auto patch = s.rule ? rule_patch(s, 0, 4, f.level) : fixture_patch(s);
    const auto rf = realize_patch(patch, f, s);
    for (int trial = 0; trial < kRandomBetas; ++trial) {
      std::vector<std::vector<Quad>> beta(cx.count(0), std::vector<Quad>(1));
      for (auto& b : beta) b[0] = Quad(uniform(-9, 9));
      // f - g = delta beta
      const auto g = plus_coboundary(f, s, beta, -1);
      const auto r = classify_pair(f, g, s);
      if (r.relation != Relation::mld) {
        c.failures.push_back(std::string(name) + ": " + to_string(r.relation));
        continue;
      }
      const auto rg = realize_patch(patch, g, s);
      const auto base = patch.vertex_cell[rf.base];
      for (std::size_t v = 0; v < rf.vertices.size(); ++v) {
        const Quad moved = rg.vertices[v][0] - rf.vertices[v][0];
        const Quad want = -(beta[patch.vertex_cell[v]][0] - beta[base][0]);
        if (std::abs((moved - want).to_double()) > kShiftTol || !(moved == want)) {
          c.failures.push_back(std::string(name) + ": vertex shift");
          break;
        }
      }
    }
  }
  return c;
}

Check decay() {
  Check c;
  auto cycles_of = [](const CellComplex& cx) {
    const QMatrix k = kernel(cx.boundary[1].cast<mpq_class>());
    std::vector<std::vector<mpz_class>> out;
    for (std::size_t j = 0; j < k.cols(); ++j) {
      mpz_class den = 1;
      for (std::size_t i = 0; i < k.rows(); ++i) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), k(i, j).get_den_mpz_t());
      std::vector<mpz_class> col;
      for (std::size_t i = 0; i < k.rows(); ++i) col.push_back(mpq_class(k(i, j) * den).get_num());
      out.push_back(col);
    }
    return out;
  };
  const auto& fib = sys("fibonacci");
  const auto d = negligibility_decay_check(part_vector(fib.eigen, PartKind::small), cycles_of(*fib.gamma), fib, 25, 5);
  const double small = (1 + std::sqrt(5.0)) / 2 - 1;
  c.expect(d.ratio && std::abs(*d.ratio - small) <= kRatioSlack * small,
           "Fibonacci ratio " + (d.ratio ? std::to_string(*d.ratio) : std::string("none")));
  const auto& tm = sys("thue_morse");
  const auto t = negligibility_decay_check(part_vector(tm.eigen, PartKind::unit), cycles_of(*tm.gamma), tm, 25, 5);
  c.expect(t.ratio && std::abs(*t.ratio - 1) <= kRatioSlack,
           "Thue-Morse ratio " + (t.ratio ? std::to_string(*t.ratio) : std::string("none")));
  return c;
}

Check weak_mixing() {
  Check c;
  const auto& tm = sys("thue_morse");
  ShapeParameter f;
  f.level = tm.level;
  for (std::size_t e = 0; e < tm.gamma->count(1); ++e) f.values.push_back({e == 0 ? Quad::sqrt_of(2) : Quad(1L)});
  c.expect(is_admissible(f, tm).admissible, "irrational collared shape admissible");
  const auto w = weak_mixing_verdict(tm, &f, &lattice("thue_morse"));
  c.expect(w.spectrum && w.spectrum->verdict == SpectrumVerdict::trivial, "Thue-Morse point spectrum trivial");
  c.expect(w.d_b > static_cast<std::size_t>(w.d), "Thue-Morse d_b > d");
  const auto pen = weak_mixing_verdict(sys("penrose_gamma1"));
  c.expect(pen.d_b > static_cast<std::size_t>(pen.d), "Penrose d_b > d");
  c.expect(weak_mixing_verdict(sys("fibonacci")).splits, "Fibonacci H^1 = PF + S");
  return c;
}

Check span() {
  Check c;
  for (const char* name : {"fibonacci", "thue_morse"}) {
    const auto& lat = lattice(name);
    c.expect(lat.saturation == Saturation::saturated, std::string(name) + " lattice saturated");
    c.expect(span_check(lat, sys(name)), std::string(name) + " pairs non-degenerately");
  }
  return c;
}

Check traces() {
  Check c;
  const auto& s = sys("fibonacci");
  const auto& lat = lattice("fibonacci");
  const auto L = shape_vector(natural_shape(s), lat, s);
  std::vector<Quad> integral(lat.rank());
  for (auto& x : integral) x = Quad(uniform(-5, 5));
  const auto zero = eigenvalue_candidate_test(integral, lat, 40);
  bool all_zero = true;
  for (const auto& row : zero.traces)
    for (double x : row) all_zero = all_zero && x == 0;
  c.expect(all_zero, "integral w gives t_m = 0");

  auto report = rationality_constraint(L, lat, s);
  test_candidates(report, L, lat, 40);
  const SpectrumCandidate* cand = nullptr;
  for (const auto& k : report.candidates)
    if (!k.c.is_zero() && k.trace && k.trace->verdict == CandidateVerdict::verified) cand = &k;
  c.expect(cand != nullptr, "a nonzero verified candidate");
  if (!cand) return c;
  std::vector<Quad> w;
  for (const auto& x : L.L[0]) w.push_back(cand->c * x);
  const auto trace = eigenvalue_candidate_test(w, lat, 40);
  const double small = (1 + std::sqrt(5.0)) / 2 - 1;
  ZMatrix power = ZMatrix::identity(lat.rank());
  std::vector<std::vector<double>> oracle(lat.rank());
  for (int m = 0; m <= 40; ++m) {
    for (std::size_t j = 0; j < lat.rank(); ++j) {
      Quad x;
      for (std::size_t i = 0; i < lat.rank(); ++i) x += w[i] * Quad(power(i, j));
      oracle[j].push_back(frac_distance(x));
    }
    power = power * lat.M;
  }
  for (std::size_t j = 0; j < lat.rank(); ++j) {
    for (int m = 0; m <= 40; ++m)
      if (std::abs(oracle[j][m] - trace.traces[j][m]) > kTraceOracleTol) {
        c.failures.push_back("trace disagrees with the oracle at m=" + std::to_string(m));
        break;
      }
    const auto rate = fitted_rate(oracle[j]);
    c.expect(rate && std::abs(*rate - small) <= kRatioSlack * small,
             "oracle rate " + (rate ? std::to_string(*rate) : std::string("none")));
  }
  return c;
}

Check dimension_bounds() {
  Check c;
  // s_PF by hand: 1 - tau is the one small conjugate of tau; 2 has none
  const std::map<std::string, std::pair<int, int>> by_hand = {
      {"fibonacci", {1, 1}}, {"thue_morse", {1, 0}}, {"penrose_gamma1", {2, 1}}};
  const std::map<std::string, int> expected = {{"fibonacci", 2}, {"thue_morse", 1}, {"penrose_gamma1", 4}};
  for (const auto& [name, ds] : by_hand) {
    const int bound = spectrum_dim_bound(sys(name).eigen);
    c.expect(bound == ds.first * (ds.second + 1), name + " bound " + std::to_string(bound));
    c.expect(bound == expected.at(name), name + " expected bound");
  }
  return c;
}

Check structural() {
  Check c;
  for (const char* name : {"fibonacci", "thue_morse", "chair"}) {
    const auto rule = parse_substitution(doc(name));
    for (int k = 0; k <= 1; ++k) {
      const auto g = build_gamma(rule, k);
      c.expect(!boundary_defect(g), std::string(name) + " boundary squared");
      for (int p = 1; p <= g.dimension; ++p) {
        const auto s = smith_normal_form(g.boundary[p]);
        c.expect(s.u * g.boundary[p] * s.v == s.d, std::string(name) + " Smith re-multiplication");
      }
    }
  }
  for (const char* name : {"fibonacci", "thue_morse", "chair", "circle", "nilpotent", "penrose_gamma1"}) {
    const auto& s = sys(name);
    c.expect(!boundary_defect(*s.gamma), std::string(name) + " boundary squared");
    c.expect(!commutation_defect(s.sigma), std::string(name) + " chain map commutes");
    if (s.to_base) c.expect(!commutation_defect(*s.to_base), std::string(name) + " forgetful map commutes");
    // reversed 1-cell order
    auto cx = std::make_shared<CellComplex>(*s.gamma);
    const std::size_t n = cx->count(1);
    ZMatrix p(n, n);
    for (std::size_t i = 0; i < n; ++i) p(i, n - 1 - i) = 1;
    std::reverse(cx->cells[1].begin(), cx->cells[1].end());
    cx->boundary[1] = cx->boundary[1] * p;
    if (cx->dimension >= 2) cx->boundary[2] = p * cx->boundary[2];
    cx->cycles.clear();
    CellularMap g{cx, cx, s.sigma.chain};
    g.chain[1] = p * s.sigma.chain[1] * p;
    const auto h = cohomology(*cx, 1);
    c.expect(characteristic_polynomial(induced_map(g, h, h)) == characteristic_polynomial(s.sigma_star),
             std::string(name) + " char poly basis independence");
    // coboundaries have zero class
    ShapeParameter z;
    z.level = s.level;
    z.dimension = s.dimension;
    z.values.assign(n, std::vector<Quad>(s.dimension));
    std::vector<std::vector<Quad>> beta(s.gamma->count(0), std::vector<Quad>(s.dimension));
    for (auto& b : beta)
      for (auto& x : b) x = Quad(uniform(-7, 7));
    const auto db = plus_coboundary(z, s, beta, 1);
    for (const auto& comp : i_map(db, s).coords)
      for (const auto& x : comp) c.expect(x.is_zero(), std::string(name) + " i_map of a coboundary");
  }
  // chair rank as a pinned regression value, from the Smith ranks of the boundaries
  const auto& chair = sys("chair");
  const std::size_t r1 = smith_normal_form(chair.gamma->boundary[1]).rank();
  const std::size_t r2 = smith_normal_form(chair.gamma->boundary[2]).rank();
  c.expect(chair.gamma->count(1) - r1 - r2 == 6, "chair H^1(Gamma1) rank pinned at 6");
  c.expect(chair.h1.rank == 6, "chair cohomology rank pinned at 6");
  c.expect(chair.eigen.reduced.rank() == 2, "chair reduced rank pinned at 2");
  return c;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Check()>>> criteria = {
      {"Thue-Morse pipeline", thue_morse_pipeline},
      {"Penrose multiplicities", penrose_multiplicities},
      {"Fibonacci classification", fibonacci_classification},
      {"coboundary suite", coboundary_suite},
      {"negligibility decay", decay},
      {"weak-mixing criteria", weak_mixing},
      {"span check", span},
      {"spectrum candidate traces", traces},
      {"dimension bounds", dimension_bounds},
      {"structural invariants", structural},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = criteria[i].second();
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream line;
    line << (c.failures.empty() ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << " ("
         << std::fixed;
    line.precision(1);
    line << secs << " s)";
    if (!c.failures.empty()) line << ": " << c.failures.front() << (c.failures.size() > 1 ? " ..." : "");
    std::puts(line.str().c_str());
    failed += !c.failures.empty();
  }
  return failed == 0 ? 0 : 1;
}
