#include "tiledeform/spectrum.hpp"

#include <algorithm>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <map>
#include <numeric>
#include <unordered_map>

namespace tiledeform {

namespace {

using Real = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<200>>;

Real to_real(const mpz_class& z) { return Real(z.get_str()); }
Real to_real(const mpq_class& q) { return to_real(q.get_num()) / to_real(q.get_den()); }
Real to_real(const Quad& x) {
  Real r = to_real(x.rational_part());
  if (!x.is_rational()) r += to_real(x.irrational_part()) * boost::multiprecision::sqrt(Real(x.radicand()));
  return r;
}

std::vector<mpz_class> mat_vec(const ZMatrix& m, const std::vector<mpz_class>& v) { return m.apply(v); }

std::vector<mpz_class> column(const ZMatrix& m, std::size_t j) { return m.column(j); }

std::string chain_key(const std::vector<mpz_class>& v) {
  std::string k;
  for (const auto& x : v) k += x.get_str() + ",";
  return k;
}

// Least squares slope of log(values) against the index.
std::optional<double> log_slope(const std::vector<double>& values, std::size_t from) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (std::size_t n = from; n < values.size(); ++n) {
    if (!(values[n] > 0)) continue;
    const double y = std::log(values[n]);
    const double x = static_cast<double>(n);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
    ++cnt;
  }
  if (cnt < 2) return std::nullopt;
  return (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
}

ZMatrix lattice_matrix(const RecurrenceLattice& lat, const ZMatrix& f1, bool* closed) {
  ZMatrix m(lat.rank(), lat.rank());
  *closed = true;
  for (std::size_t j = 0; j < lat.rank(); ++j) {
    const auto c = lat.coordinates(mat_vec(f1, column(lat.basis, j)));
    if (!c) {
      *closed = false;
      return m;
    }
    for (std::size_t i = 0; i < lat.rank(); ++i) m(i, j) = (*c)[i];
  }
  return m;
}

}  // namespace

const char* to_string(Saturation s) { return s == Saturation::saturated ? "saturated" : "possibly-incomplete"; }

const char* to_string(CandidateVerdict v) {
  switch (v) {
    case CandidateVerdict::verified: return "candidate-verified";
    case CandidateVerdict::fails: return "fails";
    case CandidateVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

const char* to_string(SpectrumVerdict v) {
  switch (v) {
    case SpectrumVerdict::trivial: return "trivial";
    case SpectrumVerdict::constrained: return "constrained";
    case SpectrumVerdict::candidate_verified: return "candidate-verified";
    case SpectrumVerdict::inconclusive: return "inconclusive";
  }
  return "?";
}

ZMatrix hermite_basis(const std::vector<std::vector<mpz_class>>& vectors, std::size_t length) {
  std::vector<std::vector<mpz_class>> a;
  for (const auto& v : vectors) {
    if (v.size() != length) throw std::invalid_argument("hermite_basis: vector of the wrong length");
    if (std::any_of(v.begin(), v.end(), [](const mpz_class& x) { return sgn(x) != 0; })) a.push_back(v);
  }
  auto axpy = [](std::vector<mpz_class>& y, const mpz_class& q, const std::vector<mpz_class>& x) {
    for (std::size_t t = 0; t < y.size(); ++t) y[t] -= q * x[t];
  };
  std::size_t r = 0;
  for (std::size_t col = 0; col < length && r < a.size(); ++col) {
    while (true) {
      std::size_t best = a.size();
      for (std::size_t i = r; i < a.size(); ++i)
        if (sgn(a[i][col]) != 0 && (best == a.size() || abs(a[i][col]) < abs(a[best][col]))) best = i;
      if (best == a.size()) break;
      std::swap(a[r], a[best]);
      bool clean = true;
      for (std::size_t i = r + 1; i < a.size(); ++i) {
        if (sgn(a[i][col]) == 0) continue;
        mpz_class q;
        mpz_fdiv_q(q.get_mpz_t(), a[i][col].get_mpz_t(), a[r][col].get_mpz_t());
        axpy(a[i], q, a[r]);
        clean = clean && sgn(a[i][col]) == 0;
      }
      if (clean) break;
    }
    if (r >= a.size() || sgn(a[r][col]) == 0) continue;
    if (sgn(a[r][col]) < 0)
      for (auto& x : a[r]) x = -x;
    for (std::size_t i = 0; i < r; ++i) {
      mpz_class q;
      mpz_fdiv_q(q.get_mpz_t(), a[i][col].get_mpz_t(), a[r][col].get_mpz_t());
      axpy(a[i], q, a[r]);
    }
    ++r;
  }
  ZMatrix out(length, r);
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < length; ++i) out(i, j) = a[j][i];
  return out;
}

std::optional<std::vector<mpz_class>> RecurrenceLattice::coordinates(const std::vector<mpz_class>& chain) const {
  if (chain.size() != basis.rows()) throw std::invalid_argument("coordinates: chain of the wrong length");
  std::vector<mpz_class> rest = chain, x(rank());
  for (std::size_t j = 0; j < rank(); ++j) {
    std::size_t p = 0;
    while (sgn(basis(p, j)) == 0) ++p;
    if (!mpz_divisible_p(rest[p].get_mpz_t(), basis(p, j).get_mpz_t())) return std::nullopt;
    x[j] = rest[p] / basis(p, j);
    for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= x[j] * basis(i, j);
  }
  for (const auto& v : rest)
    if (sgn(v) != 0) return std::nullopt;
  return x;
}

long default_size_min(const TilingSystem& s) { return std::max(s.level, 1); }

long sigma2_size_min(const TilingSystem& s) {
  if (!s.rule) return 1;
  const auto seed = seed_fixed_point(*s.rule);
  const std::size_t tile = seed ? seed->tile : 0;
  return static_cast<long>(iterate_patch(*s.rule, tile, 2).size());
}

RecurrenceSearch find_recurrences(const TilingSystem& s, std::size_t min_length, long size_min, std::size_t budget) {
  if (!s.rule || s.dimension != 1) throw std::invalid_argument("recurrence search needs a 1-D substitution rule");
  const SubstitutionRule& rule = *s.rule;
  const auto seed = seed_fixed_point(rule);
  if (!seed) throw ComplexError("no fixed-point seed for '" + rule.name + "'");
  RecurrenceSearch out;
  out.size_min = size_min < 0 ? default_size_min(s) : size_min;

  // pick the power from exact tile counts before building anything
  const std::size_t nt = rule.size();
  std::vector<mpz_class> counts(nt);
  counts[seed->tile] = 1;
  int power = 0;
  auto total = [&] {
    mpz_class t = 0;
    for (const auto& c : counts) t += c;
    return t;
  };
  while (total() < min_length) {
    std::vector<mpz_class> next(nt);
    for (std::size_t i = 0; i < nt; ++i)
      for (std::size_t j = 0; j < nt; ++j) next[i] += rule.matrix[i][j] * counts[j];
    if (mpz_class(std::accumulate(next.begin(), next.end(), mpz_class(0))) > budget) {
      out.budget_exhausted = true;
      break;
    }
    counts = std::move(next);
    ++power;
  }
  out.power = power;
  Patch patch = iterate_patch(rule, seed->tile, power, budget);
  std::sort(patch.placements.begin(), patch.placements.end(),
            [](const Placement& a, const Placement& b) { return a.x < b.x; });
  const std::size_t n = patch.size();
  out.word_length = n;
  std::vector<std::size_t> word(n);
  for (std::size_t i = 0; i < n; ++i) word[i] = patch.placements[i].tile;

  const long k = s.level;
  const long R = std::max(out.size_min, k);
  if (static_cast<long>(n) <= 2 * R + 1) return out;
  bool short_ids = true;
  for (const auto& p : rule.prototiles) short_ids = short_ids && p.id.size() == 1;
  const std::string sep = short_ids ? "" : ".";

  // level-k label of every position with a full collar
  const CellComplex& cx = *s.gamma;
  std::vector<long> cell(n, -1);
  std::map<std::string, std::size_t> cache;
  for (std::size_t i = k; i + k < n; ++i) {
    std::string enc;
    for (std::size_t m = i - k; m <= i + k; ++m) {
      if (m > i - k) enc += sep;
      enc += rule.prototiles[word[m]].id;
    }
    auto it = cache.find(enc);
    if (it == cache.end()) {
      try {
        it = cache.emplace(enc, cx.index_of(1, enc)).first;
      } catch (const std::out_of_range&) {
        throw ComplexError("collared tile '" + enc + "' of the fixed-point word is missing from the complex");
      }
    }
    cell[i] = static_cast<long>(it->second);
  }
  const std::size_t ne = cx.count(1);
  std::vector<std::vector<long>> prefix(n + 1, std::vector<long>(ne, 0));
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i];
    if (cell[i] >= 0) ++prefix[i + 1][cell[i]];
  }

  std::unordered_map<std::string, std::size_t> last;
  std::unordered_map<std::string, std::size_t> by_class;
  for (std::size_t i = R; i + R < n; ++i) {
    std::string key;
    for (std::size_t m = i - R; m <= i + R; ++m) key.push_back(static_cast<char>(word[m] + 1));
    auto it = last.find(key);
    if (it != last.end()) {
      const std::size_t a = it->second;
      Recurrence rec;
      rec.start = a;
      rec.end = i;
      long r = R;
      while (true) {
        if (a < static_cast<std::size_t>(r + 1) || i + r + 1 >= n) {
          rec.truncated = true;
          break;
        }
        if (word[a - r - 1] != word[i - r - 1] || word[a + r + 1] != word[i + r + 1]) break;
        ++r;
      }
      rec.size = r;
      rec.degree = static_cast<double>(r) / static_cast<double>(i - a);
      rec.chain.resize(ne);
      for (std::size_t e = 0; e < ne; ++e) rec.chain[e] = prefix[i][e] - prefix[a][e];
      const std::string ck = chain_key(rec.chain);
      auto found = by_class.find(ck);
      if (found == by_class.end()) {
        by_class.emplace(ck, out.recurrences.size());
        out.recurrences.push_back(std::move(rec));
      } else if (out.recurrences[found->second].size < rec.size) {
        out.recurrences[found->second] = std::move(rec);
      }
    }
    last[key] = i;
  }
  std::sort(out.recurrences.begin(), out.recurrences.end(), [](const Recurrence& x, const Recurrence& y) {
    return std::tie(x.end, x.start) < std::tie(y.end, y.start);
  });
  return out;
}

RecurrenceLattice recurrence_lattice(const TilingSystem& s, const std::vector<Recurrence>& recurrences) {
  if (recurrences.empty()) throw std::invalid_argument("recurrence_lattice: no recurrences");
  const ZMatrix& f1 = s.sigma.chain[1];
  const ZMatrix& d1 = s.gamma->boundary[1];
  RecurrenceLattice lat;
  lat.generators = recurrences;
  std::vector<std::vector<mpz_class>> vecs;
  for (const auto& r : recurrences) {
    for (const auto& x : d1.apply(r.chain))
      if (sgn(x) != 0) throw ComplexError("recurrence chain is not a cycle");
    vecs.push_back(r.chain);
  }
  const std::size_t ne = s.gamma->count(1);
  lat.basis = hermite_basis(vecs, ne);
  bool closed = false;
  for (int round = 0; round < 16 && !closed; ++round) {
    closed = true;
    for (std::size_t j = 0; j < lat.rank(); ++j) {
      auto img = mat_vec(f1, column(lat.basis, j));
      if (!lat.coordinates(img)) {
        vecs.push_back(std::move(img));
        closed = false;
      }
    }
    if (!closed) {
      lat.basis = hermite_basis(vecs, ne);
      lat.notes.push_back("lattice enlarged by substitution images");
    }
  }
  lat.M = lattice_matrix(lat, f1, &closed);
  if (!closed) lat.notes.push_back("lattice not closed under the substitution");
  lat.saturation = Saturation::possibly_incomplete;
  return lat;
}

RecurrenceLattice saturated_lattice(const TilingSystem& s, const LatticeOptions& opt) {
  std::vector<Recurrence> all;
  std::map<std::string, std::size_t> seen;
  std::optional<RecurrenceLattice> prev;
  int stable = 0;
  std::size_t length = opt.min_length;
  long size_min = opt.size_min;
  bool exhausted = false;
  int round = 0;
  for (; round < opt.max_rounds; ++round, length *= 2) {
    const auto found = find_recurrences(s, length, opt.size_min, opt.budget);
    size_min = found.size_min;
    exhausted = found.budget_exhausted;
    for (const auto& r : found.recurrences) {
      const std::string ck = chain_key(r.chain);
      auto it = seen.find(ck);
      if (it == seen.end()) {
        seen.emplace(ck, all.size());
        all.push_back(r);
      } else if (all[it->second].size < r.size) {
        all[it->second] = r;
      }
    }
    if (all.empty()) continue;
    RecurrenceLattice lat = recurrence_lattice(s, all);
    const bool same = prev && prev->basis == lat.basis;
    stable = same ? stable + 1 : 0;
    prev = std::move(lat);
    if (stable >= 2 || exhausted) break;
  }
  if (!prev) throw ComplexError("no recurrences found for '" + s.name + "'");
  RecurrenceLattice lat = std::move(*prev);
  lat.rounds = round + 1;
  bool closed = true;
  lattice_matrix(lat, s.sigma.chain[1], &closed);
  lat.saturation = stable >= 2 && closed ? Saturation::saturated : Saturation::possibly_incomplete;
  if (exhausted && lat.saturation != Saturation::saturated) lat.notes.push_back("budget exhausted before saturation");
  lat.recognition_radius_estimate = static_cast<double>(size_min);
  return lat;
}

RecurrenceLattice homology_lattice(const TilingSystem& s) {
  const ZMatrix& d1 = s.gamma->boundary[1];
  const std::size_t ne = s.gamma->count(1);
  const QMatrix kq = kernel(d1.cast<mpq_class>());
  RecurrenceLattice lat;
  ZMatrix kz(ne, kq.cols());
  for (std::size_t j = 0; j < kq.cols(); ++j) {
    mpz_class l = 1;
    for (std::size_t i = 0; i < ne; ++i) mpz_lcm(l.get_mpz_t(), l.get_mpz_t(), kq(i, j).get_den_mpz_t());
    for (std::size_t i = 0; i < ne; ++i) kz(i, j) = mpz_class(kq(i, j) * l);
  }
  // saturate: the first r columns of U^{-1} from U K V = D span (Q K) cap Z^n
  std::vector<std::vector<mpz_class>> cols;
  if (kz.cols() > 0) {
    const auto snf = smith_normal_form(kz);
    const auto uinv = inverse(snf.u.cast<mpq_class>());
    if (!uinv) throw ComplexError("homology_lattice: Smith transform not invertible");
    for (std::size_t j = 0; j < kz.cols(); ++j) {
      std::vector<mpz_class> c(ne);
      for (std::size_t i = 0; i < ne; ++i) c[i] = mpz_class((*uinv)(i, j));
      cols.push_back(std::move(c));
    }
  }
  lat.basis = hermite_basis(cols, ne);
  bool closed = true;
  lat.M = lattice_matrix(lat, s.sigma.chain[1], &closed);
  if (!closed) throw ComplexError("homology_lattice: chain map does not preserve cycles");
  lat.saturation = Saturation::saturated;
  lat.rounds = 0;
  lat.notes.push_back("full integral first homology of the complex");
  return lat;
}

bool span_check(const RecurrenceLattice& lat, const TilingSystem& s) {
  const std::size_t r = s.eigen.reduced.rank();
  if (r == 0) return true;
  QuadMatrix pairing(r, lat.rank());
  for (std::size_t i = 0; i < r; ++i) {
    std::vector<Quad> e(r);
    e[i] = Quad(1L);
    const auto beta = s.cochain_of(e);
    for (std::size_t j = 0; j < lat.rank(); ++j) {
      Quad v;
      for (std::size_t c = 0; c < beta.size(); ++c)
        if (sgn(lat.basis(c, j)) != 0) v += beta[c] * Quad(lat.basis(c, j));
      pairing(i, j) = v;
    }
  }
  return rank(pairing) == r;
}

std::vector<std::vector<double>> ShapeVector::numeric() const {
  std::vector<std::vector<double>> out;
  for (const auto& row : L) out.push_back(to_double(row));
  return out;
}

ShapeVector shape_vector(const ShapeParameter& f, const RecurrenceLattice& lat, const TilingSystem& s) {
  ShapeVector sv;
  for (const auto& comp : lift(f, s)) {
    if (comp.size() != lat.basis.rows()) throw std::invalid_argument("shape_vector: lattice lives on another complex");
    std::vector<Quad> row(lat.rank());
    for (std::size_t j = 0; j < lat.rank(); ++j)
      for (std::size_t c = 0; c < comp.size(); ++c)
        if (sgn(lat.basis(c, j)) != 0 && !comp[c].is_zero()) row[j] += comp[c] * Quad(lat.basis(c, j));
    sv.L.push_back(std::move(row));
  }
  return sv;
}

namespace {

CandidateTrace run_traces(const std::vector<Real>& w, const RecurrenceLattice& lat, int m_max) {
  CandidateTrace out;
  const std::size_t s = lat.rank();
  bool all_verified = true, any_fail = false;
  for (std::size_t j = 0; j < s; ++j) {
    std::vector<mpz_class> v(s);
    v[j] = 1;
    std::vector<double> trace;
    for (int m = 0; m <= m_max; ++m) {
      Real val = 0;
      for (std::size_t i = 0; i < s; ++i)
        if (sgn(v[i]) != 0) val += w[i] * to_real(v[i]);
      const Real frac = val - boost::multiprecision::round(val);
      trace.push_back(static_cast<double>(boost::multiprecision::abs(frac)));
      v = mat_vec(lat.M, v);
    }
    const std::size_t tail = trace.size() > 10 ? trace.size() - 10 : 0;
    const double worst = *std::max_element(trace.begin() + static_cast<long>(tail), trace.end());
    bool verified = trace.back() < kTraceThreshold;
    if (verified && worst >= 1e-12) {
      const auto slope = log_slope(trace, tail);
      verified = slope && *slope < 0;
      if (slope) out.rate = std::max(out.rate.value_or(0.0), std::exp(*slope));
    }
    all_verified = all_verified && verified;
    any_fail = any_fail || worst >= kTraceFailure;
    out.traces.push_back(std::move(trace));
  }
  out.verdict = any_fail ? CandidateVerdict::fails : all_verified ? CandidateVerdict::verified : CandidateVerdict::inconclusive;
  return out;
}

}  // namespace

CandidateTrace eigenvalue_candidate_test(const std::vector<Quad>& w, const RecurrenceLattice& lat, int m_max) {
  if (w.size() != lat.rank()) throw std::invalid_argument("candidate row has the wrong length");
  std::vector<Real> wr;
  for (const auto& x : w) wr.push_back(to_real(x));
  return run_traces(wr, lat, m_max);
}

CandidateTrace eigenvalue_candidate_test(const std::vector<double>& k, const ShapeVector& L, const RecurrenceLattice& lat,
                                         int m_max) {
  if (k.size() != L.L.size()) throw std::invalid_argument("k has the wrong dimension");
  const Real two_pi = 2 * boost::math::constants::pi<Real>();
  std::vector<Real> w(lat.rank(), Real(0));
  for (std::size_t c = 0; c < k.size(); ++c)
    for (std::size_t j = 0; j < lat.rank(); ++j) w[j] += Real(k[c]) * to_real(L.L[c][j]) / two_pi;
  return run_traces(w, lat, m_max);
}

int spectrum_dim_bound(const EigenStructure& e) {
  return e.coefficient_dimension * static_cast<int>(e.s_pf + 1);
}

SpectrumReport rationality_constraint(const ShapeVector& L, const RecurrenceLattice& lat, const TilingSystem& s) {
  SpectrumReport rep;
  rep.d = static_cast<int>(L.L.size());
  rep.d_b = s.eigen.d_b;
  rep.dimension_bound = spectrum_dim_bound(s.eigen);
  const std::size_t n = lat.rank();
  const EigenStructure em = eigen_structure(lat.M.cast<mpq_class>(), s.stretch, rep.d);
  rep.all_nonsmall = em.dim(Subspace::S) == 0;
  rep.constraint = rep.all_nonsmall ? "k.L/2pi in Q^s" : "k.L/2pi in Q^s + S";
  if (rep.d != 1) {
    rep.notes.push_back("rational solution sets are decided for one-dimensional shapes only");
    return rep;
  }
  if (!em.exact) {
    rep.notes.push_back("eigenvectors of M are not exact in one quadratic field");
    return rep;
  }
  // U: invariant subspace of the non-small nonzero roots, in lattice coordinates
  std::vector<std::vector<Quad>> U;
  std::size_t at = 0;
  for (const auto& p : em.parts) {
    if (!em.in(Subspace::S, p))
      for (std::size_t k = 0; k < p.dim; ++k)
        U.push_back(tiledeform::apply(em.reduced.from_reduced, em.basis.column(at + k)));
    at += p.dim;
  }
  long D = 1;
  auto note_field = [&](const Quad& x) {
    if (x.is_rational()) return true;
    if (D == 1) D = x.radicand();
    return D == x.radicand();
  };
  std::vector<Quad> ell;
  bool one_field = true;
  for (const auto& u : U) {
    Quad v;
    for (std::size_t j = 0; j < n; ++j) {
      one_field = note_field(u[j]) && one_field;
      one_field = note_field(L.L[0][j]) && one_field;
      if (one_field) v += L.L[0][j] * u[j];
    }
    ell.push_back(v);
  }
  if (!one_field) {
    rep.notes.push_back("shape values and eigenvectors lie in different quadratic fields");
    return rep;
  }
  // unknowns (x, y, q_1..q_n) with c = x + y sqrt(D); y dropped when D = 1
  const std::size_t cu = D == 1 ? 1 : 2;
  QMatrix sys(2 * U.size(), cu + n);
  for (std::size_t i = 0; i < U.size(); ++i) {
    const mpq_class& a = ell[i].rational_part();
    const mpq_class& b = ell[i].irrational_part();
    sys(2 * i, 0) = a;
    sys(2 * i + 1, 0) = b;
    if (cu == 2) {
      sys(2 * i, 1) = b * D;
      sys(2 * i + 1, 1) = a;
    }
    for (std::size_t j = 0; j < n; ++j) {
      sys(2 * i, cu + j) = -U[i][j].rational_part();
      sys(2 * i + 1, cu + j) = -U[i][j].irrational_part();
    }
  }
  const QMatrix ker = kernel(sys);
  QMatrix proj(cu, ker.cols());
  for (std::size_t j = 0; j < ker.cols(); ++j)
    for (std::size_t t = 0; t < cu; ++t) proj(t, j) = ker(t, j);
  rep.solution_dimension = rank(proj);
  if (std::all_of(ell.begin(), ell.end(), [](const Quad& x) { return x.is_zero(); }))
    rep.notes.push_back("L vanishes on the non-negligible part: every k satisfies the constraint");
  if (rep.solution_dimension == 0) {
    rep.verdict = lat.saturation == Saturation::saturated ? SpectrumVerdict::trivial : SpectrumVerdict::inconclusive;
    if (lat.saturation != Saturation::saturated) rep.notes.push_back("trivial spectrum not claimed: lattice possibly incomplete");
    return rep;
  }
  rep.verdict = SpectrumVerdict::constrained;
  for (std::size_t j = 0; j < ker.cols(); ++j) {
    const mpq_class x = ker(0, j);
    const mpq_class y = cu == 2 ? ker(1, j) : mpq_class(0);
    if (x == 0 && y == 0) continue;
    SpectrumCandidate cand;
    cand.c = cu == 2 ? Quad(x, y, D) : Quad(x);
    for (std::size_t t = 0; t < n; ++t) cand.q.push_back(ker(cu + t, j));
    rep.candidates.push_back(std::move(cand));
  }
  return rep;
}

void test_candidates(SpectrumReport& rep, const ShapeVector& L, const RecurrenceLattice& lat, int m_max,
                     std::size_t max_candidates) {
  if (L.L.size() != 1) return;
  for (std::size_t i = 0; i < rep.candidates.size() && i < max_candidates; ++i) {
    auto& cand = rep.candidates[i];
    std::vector<Quad> w;
    for (const auto& x : L.L[0]) w.push_back(cand.c * x);
    cand.trace = eigenvalue_candidate_test(w, lat, m_max);
    if (cand.trace->verdict == CandidateVerdict::verified && rep.verdict == SpectrumVerdict::constrained)
      rep.verdict = SpectrumVerdict::candidate_verified;
  }
}

WeakMixingReport weak_mixing_verdict(const TilingSystem& s, const ShapeParameter* f, const RecurrenceLattice* lattice) {
  WeakMixingReport rep;
  const EigenStructure& e = s.eigen;
  rep.d_b = e.d_b;
  rep.d = s.dimension;
  rep.splits = e.dim(Subspace::PF) + e.dim(Subspace::S) == e.reduced.rank();
  rep.generic_weak_mixing = !rep.splits;
  if (rep.splits)
    rep.notes.push_back("H^1 = PF + S: no genericity argument for weak mixing");
  else
    rep.notes.push_back("H^1 has classes outside PF + S: generic shapes are weakly mixing");
  if (!f) return rep;
  if (!s.rule || s.dimension != 1) {
    rep.notes.push_back("per-shape verdict needs a 1-D substitution rule");
    return rep;
  }
  std::optional<RecurrenceLattice> own;
  if (!lattice) {
    own = saturated_lattice(s);
    lattice = &*own;
  }
  const ShapeVector L = shape_vector(*f, *lattice, s);
  rep.spectrum = rationality_constraint(L, *lattice, s);
  test_candidates(*rep.spectrum, L, *lattice);
  return rep;
}

FamilySet recurrence_families(const RecurrenceLattice& lat, const TilingSystem& s, double p, double epsilon) {
  FamilySet fam;
  fam.p = p;
  fam.epsilon = epsilon;
  const std::size_t N = lat.generators.size();
  std::vector<std::vector<mpz_class>> coords(N);
  for (std::size_t r = 0; r < N; ++r) {
    auto c = lat.coordinates(lat.generators[r].chain);
    if (!c) throw ComplexError("stored recurrence outside its lattice");
    coords[r] = std::move(*c);
  }
  std::vector<std::vector<mpz_class>> images(N);
  for (std::size_t r = 0; r < N; ++r) images[r] = mat_vec(lat.M, coords[r]);

  double lambda = 2;
  if (s.stretch) lambda = s.stretch->to_double();
  fam.D = lat.recognition_radius_estimate.value_or(0);
  if (fam.D == 0)
    for (const auto& g : lat.generators) fam.D = std::max(fam.D, static_cast<double>(g.size));
  fam.length_bound = fam.D * lambda / (epsilon * (lambda - 1));
  fam.heuristic = true;

  std::map<std::size_t, std::size_t> family_of;
  for (std::size_t r = 0; r < N; ++r) {
    if (lat.generators[r].degree < p) continue;
    std::size_t cur = r;
    int k = 0;
    while (k < 64) {
      std::optional<std::size_t> pre;
      for (std::size_t y = 0; y < N; ++y) {
        if (y == cur || images[y] != coords[cur]) continue;
        if (!pre || lat.generators[y].length() < lat.generators[*pre].length()) pre = y;
      }
      if (!pre) break;
      cur = *pre;
      ++k;
    }
    auto it = family_of.find(cur);
    if (it == family_of.end()) {
      it = family_of.emplace(cur, fam.generators.size()).first;
      fam.generators.push_back(coords[cur]);
      fam.generator_lengths.push_back(lat.generators[cur].length());
    }
    fam.factorization.push_back({r, k, it->second});
  }
  for (std::size_t i = 0; i < fam.generators.size(); ++i)
    if (static_cast<double>(fam.generator_lengths[i]) > fam.length_bound)
      fam.notes.push_back("generator " + std::to_string(i) + " is longer than the family bound");
  return fam;
}

std::vector<std::vector<std::vector<double>>> conjugacy_invariant_table(const ShapeVector& L, const FamilySet& fam,
                                                                        const RecurrenceLattice& lat, int k_max) {
  std::vector<std::vector<std::vector<double>>> table;
  for (const auto& g : fam.generators) {
    std::vector<std::vector<double>> rows;
    std::vector<mpz_class> v = g;
    for (int k = 0; k <= k_max; ++k) {
      std::vector<double> disp;
      for (const auto& comp : L.L) {
        Quad x;
        for (std::size_t j = 0; j < v.size(); ++j)
          if (sgn(v[j]) != 0) x += comp[j] * Quad(v[j]);
        disp.push_back(x.to_double());
      }
      rows.push_back(std::move(disp));
      v = mat_vec(lat.M, v);
    }
    table.push_back(std::move(rows));
  }
  return table;
}

}  // namespace tiledeform
