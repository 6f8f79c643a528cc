#include <doctest.h>

#include <numeric>

#include "support.hpp"
#include "tiledeform/cohomology.hpp"

using namespace tiledeform;

namespace {

SubstitutionRule rule_of(const std::string& name) { return parse_substitution(testing::fixture_doc(name)); }

// rank H^1 of a graph = E - V + components
std::size_t graph_betti(const CellComplex& c) {
  std::vector<std::size_t> parent(c.count(0));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  std::size_t components = c.count(0);
  for (std::size_t e = 0; e < c.count(1); ++e) {
    std::vector<std::size_t> ends;
    for (std::size_t v = 0; v < c.count(0); ++v)
      if (c.boundary[1](v, e) != 0) ends.push_back(v);
    if (ends.size() == 2 && find(ends[0]) != find(ends[1])) {
      parent[find(ends[0])] = find(ends[1]);
      --components;
    }
  }
  return c.count(1) - c.count(0) + components;
}

// same complex and self-map with the 1-cells listed in reverse
std::pair<std::shared_ptr<CellComplex>, CellularMap> reversed_edges(const CellularMap& f) {
  auto c = std::make_shared<CellComplex>(*f.source);
  const std::size_t n = c->count(1);
  ZMatrix p(n, n);
  for (std::size_t i = 0; i < n; ++i) p(i, n - 1 - i) = 1;
  std::reverse(c->cells[1].begin(), c->cells[1].end());
  c->boundary[1] = c->boundary[1] * p;
  if (c->dimension >= 2) c->boundary[2] = p * c->boundary[2];
  c->cycles.clear();
  CellularMap g{c, c, f.chain};
  g.chain[1] = p * f.chain[1] * p;
  return {c, g};
}

std::vector<Quad> column(const QuadMatrix& m, std::size_t j) { return m.column(j); }

bool all_zero(const std::vector<Quad>& v) {
  return std::all_of(v.begin(), v.end(), [](const Quad& x) { return x.is_zero(); });
}

}  // namespace

TEST_SUITE("cohomology") {
  TEST_CASE("ranks") {
    const auto circle = load_complex_fixture(testing::fixture_doc("circle"));
    const auto h = cohomology(*circle.complex, 1);
    CHECK(h.rank == 1);
    CHECK(h.torsion.empty());
    CHECK(testing::sys("thue_morse").h1.rank == 3);
    const auto fib0 = build_gamma(rule_of("fibonacci"), 0);
    CHECK(cohomology(fib0, 1).rank == 2);
    CHECK(testing::sys("fibonacci").h1.rank == 2);  // 4 edges, 3 vertex classes
    CHECK(testing::sys("chair").h1.rank == 6);
  }

  TEST_CASE("graph ranks agree with a union-find count") {
    for (const char* name : {"fibonacci", "thue_morse"})
      for (int k = 0; k <= 2; ++k) {
        const auto c = build_gamma(rule_of(name), k);
        CHECK(cohomology(c, 1).rank == graph_betti(c));
      }
  }

  TEST_CASE("rank-nullity on the coboundaries") {
    for (const char* name : {"fibonacci", "thue_morse", "chair", "penrose_gamma1"}) {
      CAPTURE(name);
      const auto& h = testing::sys(name).h1;
      CHECK(h.rank + rank(h.coboundary_in) + rank(h.coboundary_out) == h.cochains);
      CHECK((h.coboundary_out * h.coboundary_in).is_zero_matrix());
      CHECK((h.coboundary_out * h.cocycle_basis).is_zero_matrix());
      CHECK((h.coordinate_map * h.coboundary_in).is_zero_matrix());
      CHECK(h.coordinate_map * h.cocycle_basis == QMatrix::identity(h.rank));
    }
  }

  TEST_CASE("induced matrices") {
    const auto& tm = testing::sys("thue_morse");
    CHECK(tm.sigma_star.rows() == 3);
    CHECK(tm.eigen.char_poly == IntPoly{0, -2, -1, 1});  // (x-2)(x+1)x
    const auto& circle = testing::sys("circle");
    REQUIRE(circle.sigma_star.rows() == 1);
    CHECK(circle.sigma_star(0, 0) == 2);
    const auto& fib = testing::sys("fibonacci");
    CHECK(fib.eigen.char_poly == IntPoly{-1, -1, 1});
  }

  TEST_CASE("pullback of a cocycle is a cocycle") {
    for (const char* name : {"fibonacci", "thue_morse", "chair"}) {
      const auto& s = testing::sys(name);
      const QMatrix pull = s.sigma.chain[1].cast<mpq_class>().transpose();
      CHECK((s.h1.coboundary_out * pull * s.h1.cocycle_basis).is_zero_matrix());
    }
  }

  TEST_CASE("characteristic polynomial does not depend on the cell order") {
    for (const char* name : {"thue_morse", "fibonacci", "chair"}) {
      CAPTURE(name);
      const auto& s = testing::sys(name);
      const auto [c, g] = reversed_edges(s.sigma);
      const auto h = cohomology(*c, 1);
      const QMatrix m = induced_map(g, h, h);
      CHECK(characteristic_polynomial(m) == characteristic_polynomial(s.sigma_star));
    }
  }

  TEST_CASE("Thue-Morse eigen data") {
    const auto& e = testing::sys("thue_morse").eigen;
    CHECK(e.zero_multiplicity == 1);
    CHECK(e.reduced.rank() == 2);
    CHECK(e.dim(Subspace::S) == 0);
    CHECK(e.dim(Subspace::unit) == 1);
    CHECK(e.dim(Subspace::large) == 1);
    CHECK(e.d_b == 2);
    CHECK(characteristic_polynomial(e.reduced.matrix) == RatPoly{-2, -1, 1});
    CHECK(e.dim(Subspace::S) + e.zero_multiplicity + e.d_b == e.dimension);
  }

  TEST_CASE("Fibonacci eigen data") {
    const auto& e = testing::sys("fibonacci").eigen;
    CHECK(e.reduced.full_dimension == 2);
    CHECK(e.reduced.rank() == 2);
    CHECK(e.dim(Subspace::S) == 1);
    CHECK(e.dim(Subspace::PF) == 1);
    CHECK(e.s_pf == 1);
    CHECK(e.b_pf == 1);
    REQUIRE(e.pf_root);
    REQUIRE(e.roots[*e.pf_root].exact);
    CHECK(*e.roots[*e.pf_root].exact == Quad(mpq_class(1, 2), mpq_class(1, 2), 5));
    CHECK(e.exact);
  }

  TEST_CASE("Penrose multiplicities over R^2") {
    const auto& e = testing::sys("penrose_gamma1").eigen;
    CHECK(e.coefficient_dimension == 2);
    CHECK(e.reduced.rank() == 5);
    CHECK(e.char_poly == IntPoly{1, 3, 1, -3, -1, 1});
    const Quad tau(mpq_class(1, 2), mpq_class(1, 2), 5);
    int large = 0, small = 0, minus_one = 0;
    for (const auto& r : e.roots) {
      REQUIRE(r.exact);
      const int m = r.multiplicity * e.coefficient_dimension;
      if (*r.exact == tau) large += m;
      else if (*r.exact == Quad(1L) - tau) small += m;
      else if (*r.exact == Quad(-1L)) minus_one += m;
    }
    CHECK(large == 4);
    CHECK(small == 4);
    CHECK(minus_one == 2);
    CHECK(e.d_b == 3);
  }

  TEST_CASE("nilpotent self-map leaves nothing after the quotient") {
    const auto& e = testing::sys("nilpotent").eigen;
    CHECK(e.reduced.full_dimension == 2);  // two loops, a -> b -> 0
    CHECK(e.reduced.rank() == 0);
    CHECK(e.d_b == 0);
    CHECK(e.dim(Subspace::S) == 0);
  }

  TEST_CASE("eigenvectors satisfy their equations") {
    for (const char* name : {"fibonacci", "thue_morse", "chair", "penrose_gamma1"}) {
      CAPTURE(name);
      const auto& e = testing::sys(name).eigen;
      std::size_t total = 0;
      for (const auto& part : e.parts) {
        total += part.dim;
        CHECK(part.residual <= 1e-9);
        if (!part.exact || part.roots.size() != 1 || !e.roots[part.roots[0]].exact) continue;
        const Quad lambda = *e.roots[part.roots[0]].exact;
        for (std::size_t j = 0; j < part.dim; ++j) {
          auto v = column(part.basis, j);
          for (std::size_t step = 0; step < part.dim; ++step) {
            auto mv = tiledeform::apply(e.reduced.matrix, v);
            for (std::size_t i = 0; i < v.size(); ++i) v[i] = mv[i] - lambda * v[i];
          }
          CHECK(all_zero(v));
        }
      }
      CHECK(total == e.reduced.rank());
    }
  }

  TEST_CASE("subspace projections") {
    const auto& tm = testing::sys("thue_morse").eigen;
    for (const auto& part : tm.parts) {
      if (part.kind != PartKind::large_pf) continue;
      const auto v = column(part.basis, 0);
      const auto p = subspace_project(v, tm, Subspace::large);
      REQUIRE(p.exact);
      CHECK(p.value == v);
    }
    const auto& fib = testing::sys("fibonacci").eigen;
    std::vector<Quad> pf, small;
    for (const auto& part : fib.parts) {
      if (part.kind == PartKind::large_pf) pf = column(part.basis, 0);
      if (part.kind == PartKind::small) small = column(part.basis, 0);
    }
    REQUIRE(pf.size() == 2);
    REQUIRE(small.size() == 2);
    std::vector<Quad> v(2);
    for (int i = 0; i < 2; ++i) v[i] = pf[i] + small[i];
    CHECK(subspace_project(v, fib, Subspace::S).value == small);
    CHECK(subspace_project(v, fib, Subspace::PF).value == pf);
    for (Subspace s : {Subspace::S, Subspace::PF, Subspace::unit, Subspace::large}) {
      const auto z = subspace_project(std::vector<Quad>(2), fib, s);
      CHECK(all_zero(z.value));
    }
    // numeric path: components add back up
    const auto& pen = testing::sys("penrose_gamma1").eigen;
    std::vector<double> w(pen.reduced.rank());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.5 + double(i);
    std::vector<double> sum(w.size(), 0.0);
    for (Subspace s : {Subspace::S, Subspace::unit, Subspace::large}) {
      const auto p = subspace_project(w, pen, s);
      for (std::size_t i = 0; i < w.size(); ++i) sum[i] += p.numeric[i];
    }
    for (std::size_t i = 0; i < w.size(); ++i) CHECK(sum[i] == doctest::Approx(w[i]).epsilon(1e-9));
  }

  TEST_CASE("class coordinates ignore coboundaries") {
    const auto& s = testing::sys("chair");
    const auto& h = s.h1;
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<mpq_class> beta(h.coboundary_in.cols());
      for (auto& b : beta) b = testing::uniform(-5, 5);
      const auto db = h.coboundary_in.apply(beta);
      const auto coords = h.coordinates(db);
      CHECK(std::all_of(coords.begin(), coords.end(), [](const mpq_class& x) { return x == 0; }));
      std::vector<Quad> q(db.begin(), db.end());
      CHECK(h.coboundary_witness(q).has_value());
    }
    std::vector<mpq_class> bad(h.cochains, 0);
    bool found = false;
    for (std::size_t i = 0; i < h.cochains && !found; ++i) {
      bad.assign(h.cochains, 0);
      bad[i] = 1;
      const auto out = h.coboundary_out.apply(bad);
      found = std::any_of(out.begin(), out.end(), [](const mpq_class& x) { return x != 0; });
    }
    REQUIRE(found);
    CHECK_THROWS_AS(h.coordinates(bad), std::invalid_argument);
  }
}
