#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "tiledeform/spectrum.hpp"

using namespace tiledeform;

namespace {

std::string rewrite(const std::map<char, std::string>& rule, std::string w, int n) {
  for (int i = 0; i < n; ++i) {
    std::string next;
    for (char c : w) next += rule.at(c);
    w = next;
  }
  return w;
}

const RecurrenceLattice& lattice_of(const std::string& name) {
  static std::map<std::string, RecurrenceLattice> cache;
  auto it = cache.find(name);
  if (it == cache.end()) {
    const auto& s = testing::sys(name);
    it = cache.emplace(name, s.rule ? saturated_lattice(s) : homology_lattice(s)).first;
  }
  return it->second;
}

IntPoly strip_zero_roots(IntPoly p) {
  while (p.size() > 1 && p.front() == 0) p.erase(p.begin());
  return p;
}

IntPoly int_char_poly(const ZMatrix& m) {
  const RatPoly r = characteristic_polynomial(m.cast<mpq_class>());
  IntPoly out;
  for (const auto& c : r) out.push_back(c.get_num());
  return out;
}

// distance to the nearest integer of a + b sqrt(D), in 512-bit floats
double frac_distance(const Quad& x) {
  mpf_class a(x.rational_part(), 512), b(x.irrational_part(), 512), r(x.radicand(), 512);
  mpf_class v(0, 512);
  v = a + b * sqrt(r);
  mpf_class fl(0, 512);
  fl = floor(v);
  mpf_class d(0, 512);
  d = v - fl;
  const double f = d.get_d();
  return std::min(f, 1.0 - f);
}

ShapeParameter level_one(const TilingSystem& s, const std::function<Quad(std::size_t)>& value) {
  ShapeParameter f;
  f.level = s.level;
  f.dimension = 1;
  for (std::size_t e = 0; e < s.gamma->count(1); ++e) f.values.push_back({value(e)});
  return f;
}

}  // namespace

TEST_SUITE("spectrum") {
  TEST_CASE("recurrence lattices") {
    const auto& tm = lattice_of("thue_morse");
    CHECK(tm.rank() == 3);
    CHECK(int_char_poly(tm.M) == IntPoly{0, -2, -1, 1});
    CHECK(tm.saturation == Saturation::saturated);
    const auto& fib = lattice_of("fibonacci");
    CHECK(fib.rank() == 2);
    CHECK(int_char_poly(fib.M) == IntPoly{-1, -1, 1});
    const auto& circle = lattice_of("circle");
    CHECK(circle.rank() == 1);
    REQUIRE(circle.M.rows() == 1);
    CHECK(circle.M(0, 0) == 2);
  }

  TEST_CASE("M is the substitution acting on the lattice") {
    for (const char* name : {"fibonacci", "thue_morse", "circle"}) {
      CAPTURE(name);
      const auto& s = testing::sys(name);
      const auto& lat = lattice_of(name);
      CHECK(s.sigma.chain[1] * lat.basis == lat.basis * lat.M);
      for (const auto& g : lat.generators) CHECK(lat.coordinates(g.chain).has_value());
    }
  }

  TEST_CASE("nonzero spectra of M and of the reduced pullback agree") {
    for (const char* name : {"fibonacci", "thue_morse", "circle"}) {
      CAPTURE(name);
      const auto& s = testing::sys(name);
      IntPoly reduced;
      for (const auto& c : characteristic_polynomial(s.eigen.reduced.matrix)) reduced.push_back(c.get_num());
      CHECK(strip_zero_roots(int_char_poly(lattice_of(name).M)) == reduced);
    }
  }

  TEST_CASE("span check") {
    CHECK(span_check(lattice_of("thue_morse"), testing::sys("thue_morse")));
    CHECK(span_check(lattice_of("fibonacci"), testing::sys("fibonacci")));
    // Fibonacci pairs a rank-2 lattice with a rank-2 reduced H^1, so one vector less is a deficit
    auto cut = lattice_of("fibonacci");
    cut.basis = cut.basis.block_columns(0, cut.rank() - 1);
    CHECK_FALSE(span_check(cut, testing::sys("fibonacci")));
  }

  TEST_CASE("recurrences match a direct scan of the Fibonacci word") {
    const auto& s = testing::sys("fibonacci");
    const auto found = find_recurrences(s, 400);
    REQUIRE_FALSE(found.recurrences.empty());
    const auto seed = seed_fixed_point(*s.rule);
    REQUIRE(seed);
    const std::string seed_letter = s.rule->prototiles[seed->tile].id;
    const std::string w = rewrite({{'a', "ab"}, {'b', "a"}}, seed_letter, found.power);
    REQUIRE(w.size() == found.word_length);
    const auto label = [&](std::size_t p) { return w.substr(p - 1, 3); };
    const auto f = natural_shape(s);
    const auto& lat = lattice_of("fibonacci");
    const ShapeVector L = shape_vector(f, lat, s);
    const Quad tau(mpq_class(1, 2), mpq_class(1, 2), 5);
    for (const auto& r : found.recurrences) {
      CHECK(r.end > r.start);
      REQUIRE(r.start >= 1);
      REQUIRE(r.end + 1 < w.size());
      CHECK(label(r.start) == label(r.end));
      std::vector<mpz_class> count(s.gamma->count(1), 0);
      Quad length;
      for (std::size_t p = r.start; p < r.end; ++p) {
        ++count[s.gamma->index_of(1, label(p))];
        length += w[p] == 'a' ? tau : Quad(1L);
      }
      CHECK(count == r.chain);
      // geometric displacement is L applied to the lattice coordinates
      const auto coords = lat.coordinates(r.chain);
      REQUIRE(coords);
      Quad via_l;
      for (std::size_t j = 0; j < coords->size(); ++j) via_l += L.L[0][j] * Quad((*coords)[j]);
      CHECK(via_l == length);
    }
  }

  TEST_CASE("shape vectors") {
    const auto& s = testing::sys("thue_morse");
    const auto& lat = lattice_of("thue_morse");
    const auto f = natural_shape(s);
    const auto L = shape_vector(f, lat, s);
    for (const auto& x : L.L[0]) CHECK(x.is_rational());
    for (const auto& x : L.L[0]) CHECK(x.rational_part().get_den() == 1);

    // coboundaries do not move L
    auto g = level_one(s, [&](std::size_t) { return Quad(1L); });
    const auto Lg = shape_vector(g, lat, s);
    for (std::size_t v = 0; v < s.gamma->count(0); ++v) {
      const Quad b(testing::uniform(-4, 4));
      for (std::size_t e = 0; e < s.gamma->count(1); ++e) g.values[e][0] += Quad(s.gamma->boundary[1](v, e).get_si()) * b;
    }
    CHECK(shape_vector(g, lat, s).L == Lg.L);

    const auto zero = level_one(s, [](std::size_t) { return Quad(); });
    const auto Lz = shape_vector(zero, lat, s);
    for (const auto& x : Lz.L[0]) CHECK(x.is_zero());
  }

  TEST_CASE("the trivial character always passes") {
    for (const char* name : {"fibonacci", "thue_morse", "circle"}) {
      CAPTURE(name);
      const auto& lat = lattice_of(name);
      CHECK(eigenvalue_candidate_test(std::vector<Quad>(lat.rank()), lat).verdict == CandidateVerdict::verified);
      std::vector<Quad> w(lat.rank());
      for (auto& x : w) x = Quad(testing::uniform(-3, 3));
      const auto t = eigenvalue_candidate_test(w, lat);
      CHECK(t.verdict == CandidateVerdict::verified);
      for (const auto& row : t.traces)
        for (double x : row) CHECK(x == 0);
    }
  }

  TEST_CASE("Fibonacci traces decay like |1 - tau|") {
    const auto& s = testing::sys("fibonacci");
    const auto& lat = lattice_of("fibonacci");
    const auto L = shape_vector(natural_shape(s), lat, s);
    const auto t = eigenvalue_candidate_test(L.L[0], lat, 40);
    CHECK(t.verdict == CandidateVerdict::verified);
    REQUIRE(t.rate);
    CHECK(*t.rate == doctest::Approx(0.618).epsilon(0.1));
    // independent simulation with exact M^m
    ZMatrix mm = ZMatrix::identity(lat.rank());
    for (int m = 0; m <= 40; ++m) {
      for (std::size_t j = 0; j < lat.rank(); ++j) {
        Quad x;
        for (std::size_t i = 0; i < lat.rank(); ++i) x += L.L[0][i] * Quad(mm(i, j));
        CHECK(t.traces[j][m] == doctest::Approx(frac_distance(x)).epsilon(1e-6).scale(1));
      }
      mm = mm * lat.M;
    }
  }

  TEST_CASE("Thue-Morse with an irrational collared length") {
    const auto& s = testing::sys("thue_morse");
    const auto& lat = lattice_of("thue_morse");
    const auto f = level_one(s, [](std::size_t e) { return e == 0 ? Quad::sqrt_of(2) : Quad(1L); });
    const auto L = shape_vector(f, lat, s);
    const auto r = rationality_constraint(L, lat, s);
    CHECK(r.all_nonsmall);
    CHECK(r.verdict == SpectrumVerdict::trivial);
    const auto generic = eigenvalue_candidate_test(std::vector<double>{1.2345}, L, lat);
    CHECK(generic.verdict == CandidateVerdict::fails);

    const auto unit = shape_vector(natural_shape(s), lat, s);
    const auto c = rationality_constraint(unit, lat, s);
    CHECK(c.verdict == SpectrumVerdict::constrained);
    CHECK(c.solution_dimension == 1);
  }

  TEST_CASE("Fibonacci rationality constraint") {
    const auto& s = testing::sys("fibonacci");
    const auto& lat = lattice_of("fibonacci");
    const auto L = shape_vector(natural_shape(s), lat, s);
    auto r = rationality_constraint(L, lat, s);
    CHECK_FALSE(r.all_nonsmall);
    CHECK(r.verdict == SpectrumVerdict::constrained);
    test_candidates(r, L, lat);
    CHECK(r.verdict == SpectrumVerdict::candidate_verified);
    for (const auto& c : r.candidates)
      if (c.trace && c.trace->verdict == CandidateVerdict::verified) CHECK_FALSE(c.trace->traces.empty());
  }

  TEST_CASE("weak mixing and dimension bounds") {
    const auto fib = weak_mixing_verdict(testing::sys("fibonacci"));
    CHECK(fib.splits);
    CHECK_FALSE(fib.generic_weak_mixing);
    const auto tm = weak_mixing_verdict(testing::sys("thue_morse"));
    CHECK(tm.d_b == 2);
    CHECK(tm.generic_weak_mixing);
    const auto pen = weak_mixing_verdict(testing::sys("penrose_gamma1"));
    CHECK(pen.d == 2);
    CHECK_FALSE(pen.splits);
    CHECK(pen.generic_weak_mixing);
    CHECK(spectrum_dim_bound(testing::sys("fibonacci").eigen) == 2);
    CHECK(spectrum_dim_bound(testing::sys("thue_morse").eigen) == 1);
    CHECK(spectrum_dim_bound(testing::sys("penrose_gamma1").eigen) == 4);
  }

  TEST_CASE("recurrence families factor every stored recurrence") {
    for (const char* name : {"fibonacci", "thue_morse"}) {
      CAPTURE(name);
      const auto& s = testing::sys(name);
      const auto& lat = lattice_of(name);
      const auto fam = recurrence_families(lat, s, 0.25);
      REQUIRE_FALSE(fam.generators.empty());
      std::size_t eligible = 0;
      for (const auto& g : lat.generators) eligible += g.degree >= 0.25;
      CHECK(fam.factorization.size() == eligible);
      for (const auto& f : fam.factorization) {
        const auto coords = lat.coordinates(lat.generators[f.recurrence].chain);
        REQUIRE(coords);
        ZMatrix v(lat.rank(), 1);
        for (std::size_t i = 0; i < lat.rank(); ++i) v(i, 0) = fam.generators[f.family][i];
        for (int k = 0; k < f.k; ++k) v = lat.M * v;
        for (std::size_t i = 0; i < lat.rank(); ++i) CHECK(v(i, 0) == (*coords)[i]);
      }
    }
  }

  TEST_CASE("conjugacy invariant tables") {
    const auto& s = testing::sys("thue_morse");
    const auto& lat = lattice_of("thue_morse");
    const auto fam = recurrence_families(lat, s);
    const auto f = natural_shape(s);
    const auto Lf = shape_vector(f, lat, s);
    CHECK(conjugacy_invariant_table(Lf, fam, lat, 6) == conjugacy_invariant_table(Lf, fam, lat, 6));

    std::vector<Quad> dir;
    for (const auto& part : s.eigen.parts)
      if (part.kind == PartKind::unit) dir = part.basis.column(0);
    REQUIRE(dir.size() == 2);
    const auto cochain = s.cochain_of(dir);
    const auto lf = lift(f, s)[0];
    const auto g = level_one(s, [&](std::size_t e) { return lf[e] + Quad(mpq_class(1, 1000)) * cochain[e]; });
    const auto tf = conjugacy_invariant_table(Lf, fam, lat, 8);
    const auto tg = conjugacy_invariant_table(shape_vector(g, lat, s), fam, lat, 8);
    bool some_nonzero = false;
    for (std::size_t i = 0; i < tf.size(); ++i) {
      const double first = std::abs(tg[i][0][0] - tf[i][0][0]);
      some_nonzero = some_nonzero || first > 1e-9;
      for (std::size_t k = 0; k < tf[i].size(); ++k)
        CHECK(std::abs(tg[i][k][0] - tf[i][k][0]) == doctest::Approx(first).epsilon(1e-9));
    }
    CHECK(some_nonzero);
  }
}
