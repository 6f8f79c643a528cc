#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tiledeform/deformation.hpp"

using namespace tiledeform;

namespace {

const Quad kTau(mpq_class(1, 2), mpq_class(1, 2), 5);

mpq_class random_rational(long range, long den) {
  mpq_class q{testing::uniform(-range * den, range * den), den};
  q.canonicalize();
  return q;
}

// f + delta(beta) on the complex f lives on; beta[vertex][component]
ShapeParameter shifted(const ShapeParameter& f, const TilingSystem& s, const std::vector<std::vector<Quad>>& beta) {
  const CellComplex& c = shape_complex(f, s);
  ShapeParameter g = f;
  g.admissible = Admissible::unchecked;
  for (std::size_t e = 0; e < c.count(1); ++e)
    for (std::size_t v = 0; v < c.count(0); ++v) {
      const long sign = c.boundary[1](v, e).get_si();
      if (sign == 0) continue;
      for (int k = 0; k < f.dimension; ++k) g.values[e][k] += Quad(sign) * beta[v][k];
    }
  return g;
}

std::vector<std::vector<Quad>> random_beta(const CellComplex& c, int d) {
  std::vector<std::vector<Quad>> beta(c.count(0), std::vector<Quad>(d));
  for (auto& b : beta)
    for (auto& x : b) x = Quad(random_rational(3, 7));
  return beta;
}

ShapeParameter scaled(ShapeParameter f, const Quad& c) {
  for (auto& v : f.values)
    for (auto& x : v) x = c * x;
  f.admissible = Admissible::unchecked;
  return f;
}

// f pulled back to the system's own complex
ShapeParameter on_system_complex(const ShapeParameter& f, const TilingSystem& s) {
  const auto comps = lift(f, s);
  ShapeParameter g;
  g.level = s.level;
  g.dimension = f.dimension;
  g.values.assign(s.gamma->count(1), std::vector<Quad>(f.dimension));
  for (int k = 0; k < f.dimension; ++k)
    for (std::size_t e = 0; e < s.gamma->count(1); ++e) g.values[e][k] = comps[k][e];
  return g;
}

bool all_zero(const std::vector<Quad>& v) {
  return std::all_of(v.begin(), v.end(), [](const Quad& x) { return x.is_zero(); });
}

struct P2 {
  double x, y;
};

double cross(P2 o, P2 a, P2 b) { return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x); }

bool segments_meet(P2 a, P2 b, P2 c, P2 d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b), d3 = cross(a, b, c), d4 = cross(a, b, d);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0));
}

// simple polygon with counter-clockwise orientation
bool polygon_ok(const std::vector<P2>& p) {
  const std::size_t n = p.size();
  double area = 0;
  for (std::size_t i = 0; i < n; ++i) area += p[i].x * p[(i + 1) % n].y - p[(i + 1) % n].x * p[i].y;
  if (area <= 0) return false;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_meet(p[i], p[(i + 1) % n], p[j], p[(j + 1) % n])) return false;
    }
  return true;
}

std::vector<std::vector<mpz_class>> integer_cycles(const CellComplex& c) {
  const QMatrix k = kernel(c.boundary[1].cast<mpq_class>());
  std::vector<std::vector<mpz_class>> out;
  for (std::size_t j = 0; j < k.cols(); ++j) {
    mpz_class den = 1;
    for (std::size_t i = 0; i < k.rows(); ++i) mpz_lcm(den.get_mpz_t(), den.get_mpz_t(), k(i, j).get_den_mpz_t());
    std::vector<mpz_class> col(k.rows());
    for (std::size_t i = 0; i < k.rows(); ++i) {
      const mpq_class x = k(i, j) * den;
      col[i] = x.get_num();
    }
    out.push_back(col);
  }
  return out;
}

std::vector<Quad> eigen_direction(const EigenStructure& e, PartKind kind) {
  for (const auto& part : e.parts)
    if (part.kind == kind && part.exact) return part.basis.column(0);
  return {};
}

}  // namespace

TEST_SUITE("deformation") {
  TEST_CASE("natural shapes") {
    const auto& fib = testing::sys("fibonacci");
    const auto f = natural_shape(fib);
    CHECK(f.level == 0);
    REQUIRE(f.values.size() == 2);
    CHECK(f.values[fib.base->complex->index_of(1, "a")][0] == kTau);
    CHECK(f.values[fib.base->complex->index_of(1, "b")][0] == Quad(1L));
    CHECK(f.admissible == Admissible::yes);

    const auto& chair = testing::sys("chair");
    const auto c = natural_shape(chair);
    CHECK(c.admissible == Admissible::yes);
    for (const auto& v : c.values) {
      REQUIRE(v.size() == 2);
      CHECK((v[0] == Quad(1L) && v[1].is_zero()) != (v[1] == Quad(1L) && v[0].is_zero()));
    }

    const auto circle = natural_shape(testing::sys("circle"));
    REQUIRE(circle.values.size() == 1);
    CHECK(circle.values[0][0] == Quad(1L));
    CHECK(natural_shape(testing::sys("penrose_gamma1")).admissible == Admissible::yes);
  }

  TEST_CASE("negative length is not admissible") {
    const auto& fib = testing::sys("fibonacci");
    auto f = parse_shape(json{{"level", 0}, {"values", {{"a", 1}, {"b", -1}}}}, fib);
    const auto r = is_admissible(f, fib);
    CHECK(r.closed);
    CHECK_FALSE(r.admissible);
    CHECK(f.admissible == Admissible::no);
    CHECK_FALSE(r.diagnostics.empty());
  }

  TEST_CASE("shape documents") {
    const auto& fib = testing::sys("fibonacci");
    CHECK_THROWS_AS(parse_shape(json{{"level", 0}, {"values", {{"a", 1}}}}, fib), SchemaError);
    CHECK_THROWS_AS(parse_shape(json{{"level", 0}, {"values", {{"a", 1}, {"b", 1}, {"c", 1}}}}, fib), SchemaError);
    CHECK_THROWS_AS(parse_shape(json{{"values", {{"a", 1}, {"b", 1}}}}, fib), SchemaError);
    const auto f = natural_shape(fib);
    const auto again = parse_shape(shape_to_json(f, fib), fib);
    CHECK(again.values == f.values);
  }

  TEST_CASE("chair admissibility agrees with a segment-intersection oracle") {
    const auto& s = testing::sys("chair");
    const auto f = natural_shape(s);
    const CellComplex& c = shape_complex(f, s);
    REQUIRE(c.cycles.size() == c.count(2));
    int rejected = 0;
    for (int trial = 0; trial < 40; ++trial) {
      auto g = shifted(f, s, random_beta(c, 2));
      const auto report = is_admissible(g, s);
      CHECK(report.closed);
      bool all_ok = true;
      for (std::size_t t = 0; t < c.count(2); ++t) {
        std::vector<P2> poly{{0, 0}};
        for (const auto& [e, sign] : c.cycles[t]) {
          const P2 last = poly.back();
          poly.push_back({last.x + sign * g.values[e][0].to_double(), last.y + sign * g.values[e][1].to_double()});
        }
        poly.pop_back();
        const bool ok = polygon_ok(poly);
        all_ok = all_ok && ok;
        if (!ok) {
          bool named = false;
          for (const auto& d : report.diagnostics) named = named || d.find(c.cells[2][t].id) != std::string::npos;
          CHECK(named);
        }
      }
      CHECK(report.admissible == all_ok);
      rejected += !all_ok;
    }
    CHECK(rejected > 0);
  }

  TEST_CASE("coboundaries have zero class") {
    for (const char* name : {"fibonacci", "thue_morse", "chair", "penrose_gamma1"}) {
      CAPTURE(name);
      const auto& s = testing::sys(name);
      ShapeParameter z;
      z.level = s.level;
      z.dimension = s.dimension;
      z.values.assign(s.gamma->count(1), std::vector<Quad>(s.dimension));
      const auto db = shifted(z, s, random_beta(*s.gamma, s.dimension));
      for (const auto& comp : i_map(db, s).coords) CHECK(all_zero(comp));

      const auto f = natural_shape(s);
      const auto base = i_map(f, s);
      const auto moved = i_map(shifted(f, s, random_beta(shape_complex(f, s), s.dimension)), s);
      CHECK(moved.coords == base.coords);
    }
  }

  TEST_CASE("natural classes lie in PF") {
    for (const char* name : {"fibonacci", "penrose_gamma1", "chair"}) {
      CAPTURE(name);
      const auto& s = testing::sys(name);
      const auto cls = i_map(natural_shape(s), s);
      for (const auto& comp : cls.coords) {
        const auto pf = subspace_project(comp, s.eigen, Subspace::PF);
        if (pf.exact) {
          CHECK(pf.value == comp);
        } else {
          const auto v = to_double(comp);
          for (std::size_t i = 0; i < v.size(); ++i) CHECK(pf.numeric[i] == doctest::Approx(v[i]).epsilon(1e-9));
        }
      }
    }
  }

  TEST_CASE("coboundary witnesses") {
    const auto& s = testing::sys("chair");
    const auto f = natural_shape(s);
    const auto same = coboundary_witness(f, f, s);
    REQUIRE(same);
    for (const auto& comp : same->beta) CHECK(all_zero(comp));

    const auto g = shifted(f, s, random_beta(shape_complex(f, s), 2));
    const auto w = coboundary_witness(f, g, s);
    REQUIRE(w);
    CHECK(w->shifts == 0);
    const auto lf = lift(f, s), lg = lift(g, s);
    for (int k = 0; k < 2; ++k)
      for (std::size_t e = 0; e < s.gamma->count(1); ++e) {
        Quad db;
        for (std::size_t v = 0; v < s.gamma->count(0); ++v) db += Quad(s.gamma->boundary[1](v, e).get_si()) * w->beta[k][v];
        CHECK(db == lf[k][e] - lg[k][e]);
      }

    const auto& fib = testing::sys("fibonacci");
    const auto nat = natural_shape(fib);
    const auto ones = parse_shape(json{{"level", 0}, {"values", {{"a", 1}, {"b", 1}}}}, fib);
    CHECK_FALSE(coboundary_witness(nat, ones, fib));
  }

  TEST_CASE("classification ladder") {
    const auto& fib = testing::sys("fibonacci");
    const auto f = natural_shape(fib);
    CHECK(classify_pair(f, f, fib).relation == Relation::mld);

    const auto moved = shifted(f, fib, random_beta(*fib.base->complex, 1));
    const auto mld = classify_pair(f, moved, fib);
    CHECK(mld.relation == Relation::mld);
    CHECK(mld.beta.has_value());

    const auto ones = parse_shape(json{{"level", 0}, {"values", {{"a", 1}, {"b", 1}}}}, fib);
    const auto r = classify_pair(f, ones, fib);
    CHECK(r.relation == Relation::conjugate_up_to_linear);
    CHECK(r.exact);
    CHECK(classify_pair(ones, f, fib).relation == Relation::conjugate_up_to_linear);

    // tau f is the substitution image of f
    const auto inflated = scaled(f, kTau);
    const auto c = classify_pair(f, inflated, fib);
    CHECK(c.relation == Relation::conjugate);
    CHECK(c.shift == 1);
    CHECK(classify_pair(inflated, f, fib).relation == Relation::conjugate);
  }

  TEST_CASE("scaling is conjugate up to a scalar") {
    for (const char* name : {"fibonacci", "chair"}) {
      CAPTURE(name);
      const auto& s = testing::sys(name);
      const auto f = natural_shape(s);
      const Quad c(mpq_class(3, 2));
      const auto r = classify_pair(f, scaled(f, c), s);
      CHECK(r.relation == Relation::conjugate_up_to_linear);
      CHECK(r.remainder_norm == 0);
      REQUIRE(r.linear.size() == static_cast<std::size_t>(s.dimension));
      for (int i = 0; i < s.dimension; ++i)
        for (int j = 0; j < s.dimension; ++j) CHECK(r.linear[i][j] == (i == j ? c : Quad()));
    }
  }

  TEST_CASE("Thue-Morse perturbation along -1 is not locally conjugate") {
    const auto& s = testing::sys("thue_morse");
    const auto f = on_system_complex(natural_shape(s), s);
    const auto dir = eigen_direction(s.eigen, PartKind::unit);
    REQUIRE(dir.size() == 2);
    const auto cochain = s.cochain_of(dir);
    auto g = f;
    for (std::size_t e = 0; e < g.values.size(); ++e) g.values[e][0] += Quad(mpq_class(1, 1000)) * cochain[e];
    CHECK(is_admissible(g, s).admissible);
    const auto r = classify_pair(f, g, s);
    CHECK(r.relation == Relation::not_locally_conjugate);
    CHECK(r.obstruction_norm > 0);
    CHECK(classify_pair(g, f, s).relation == Relation::not_locally_conjugate);
  }

  TEST_CASE("decay of negligible classes") {
    const auto& fib = testing::sys("fibonacci");
    const auto cycles = integer_cycles(*fib.gamma);
    REQUIRE_FALSE(cycles.empty());
    const auto zero = negligibility_decay_check(std::vector<Quad>(fib.eigen.reduced.rank()), cycles, fib);
    for (const auto& row : zero.table)
      for (double x : row) CHECK(x == 0);

    const auto small = eigen_direction(fib.eigen, PartKind::small);
    const auto d = negligibility_decay_check(small, cycles, fib);
    REQUIRE(d.ratio);
    CHECK(*d.ratio == doctest::Approx(kTau.to_double() - 1).epsilon(0.02));
    CHECK(d.in_s);
    CHECK(d.consistent);

    const auto& tm = testing::sys("thue_morse");
    const auto flip = eigen_direction(tm.eigen, PartKind::unit);
    const auto t = negligibility_decay_check(flip, integer_cycles(*tm.gamma), tm);
    for (const auto& row : t.table)
      for (std::size_t n = 1; n < row.size(); ++n) CHECK(row[n] == doctest::Approx(row[0]).epsilon(1e-9));
  }
}
