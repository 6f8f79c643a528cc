#include "tiledeform/cohomology.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>

namespace tiledeform {

namespace {

QMatrix to_q(const ZMatrix& m) { return m.cast<mpq_class>(); }

// Scale a rational vector to a primitive integer vector with a positive leading entry.
void make_primitive(QMatrix& m, std::size_t col) {
  mpz_class den = 1, num = 0;
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const mpq_class& x = m(i, col);
    if (sgn(x) == 0) continue;
    den = lcm(den, x.get_den());
  }
  for (std::size_t i = 0; i < m.rows(); ++i) {
    mpq_class y = m(i, col) * den;
    num = gcd(num, y.get_num());
  }
  if (num == 0) return;
  mpz_class lead = 0;
  for (std::size_t i = 0; i < m.rows() && lead == 0; ++i) lead = mpq_class(m(i, col) * den).get_num();
  mpq_class scale(den, lead < 0 ? mpz_class(-num) : num);
  scale.canonicalize();
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, col) *= scale;
}

Eigen::MatrixXd to_eigen(const DMatrix& m) {
  Eigen::MatrixXd e(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) e(i, j) = m(i, j);
  return e;
}

DMatrix from_eigen(const Eigen::MatrixXd& e) {
  DMatrix m(e.rows(), e.cols());
  for (Eigen::Index i = 0; i < e.rows(); ++i)
    for (Eigen::Index j = 0; j < e.cols(); ++j) m(i, j) = e(i, j);
  return m;
}

DMatrix quad_to_double(const QuadMatrix& m) {
  DMatrix d(m.rows(), m.cols());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) d(i, j) = m(i, j).to_double();
  return d;
}

bool is_x(const IntPoly& p) { return p.size() == 2 && p[0] == 0 && p[1] == 1; }

}  // namespace

// ---------------------------------------------------------------------------

std::vector<Quad> apply(const QMatrix& m, const std::vector<Quad>& v) {
  if (v.size() != m.cols()) throw std::invalid_argument("apply: shape mismatch");
  std::vector<Quad> r(m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j)
      if (sgn(m(i, j)) != 0 && !v[j].is_zero()) r[i] += Quad(m(i, j)) * v[j];
  return r;
}

std::vector<Quad> apply(const QuadMatrix& m, const std::vector<Quad>& v) { return m.apply(v); }

std::vector<double> apply(const DMatrix& m, const std::vector<double>& v) { return m.apply(v); }

std::vector<double> to_double(const std::vector<Quad>& v) {
  std::vector<double> out;
  out.reserve(v.size());
  for (const auto& x : v) out.push_back(x.to_double());
  return out;
}

bool CohomologyPresentation::is_closed(const std::vector<Quad>& cochain) const {
  if (cochain.size() != cochains) throw std::invalid_argument("cochain has the wrong length");
  for (const auto& x : apply(coboundary_out, cochain))
    if (!x.is_zero()) return false;
  return true;
}

std::vector<Quad> CohomologyPresentation::coordinates(const std::vector<Quad>& cochain) const {
  if (!is_closed(cochain)) throw std::invalid_argument("cochain is not closed");
  return apply(coordinate_map, cochain);
}

std::vector<mpq_class> CohomologyPresentation::coordinates(const std::vector<mpq_class>& cochain) const {
  std::vector<Quad> q(cochain.begin(), cochain.end());
  std::vector<mpq_class> out;
  for (const auto& x : coordinates(q)) out.push_back(x.rational_part());
  return out;
}

std::optional<std::vector<Quad>> CohomologyPresentation::coboundary_witness(const std::vector<Quad>& cochain) const {
  if (cochain.size() != cochains) throw std::invalid_argument("cochain has the wrong length");
  if (coboundary_in.cols() == 0) {
    for (const auto& x : cochain)
      if (!x.is_zero()) return std::nullopt;
    return std::vector<Quad>{};
  }
  return solve(to_quad(coboundary_in), cochain);
}

CohomologyPresentation cohomology(const CellComplex& cx, int p) {
  if (p < 0 || p > cx.dimension) throw std::invalid_argument("cohomology degree out of range");
  CohomologyPresentation h;
  h.degree = p;
  h.cochains = cx.count(p);
  h.coboundary_in = p >= 1 ? to_q(cx.boundary[p]).transpose() : QMatrix(h.cochains, 0);
  h.coboundary_out = p < cx.dimension ? to_q(cx.boundary[p + 1]).transpose() : QMatrix(0, h.cochains);
  if (p >= 1)
    for (const auto& d : smith_diagonal(cx.boundary[p]))
      if (d > 1) h.torsion.push_back(d);

  const QMatrix cocycles = kernel(h.coboundary_out);
  const QMatrix bounds = image_basis(h.coboundary_in);
  QMatrix joint = hstack<mpq_class>({bounds, cocycles}, h.cochains);
  QMatrix reduced = joint;
  const auto pivots = rref(reduced);
  std::vector<std::size_t> chosen;
  for (auto c : pivots)
    if (c >= bounds.cols()) chosen.push_back(c);
  h.rank = chosen.size();
  h.cocycle_basis = QMatrix(h.cochains, h.rank);
  for (std::size_t k = 0; k < h.rank; ++k) {
    for (std::size_t i = 0; i < h.cochains; ++i) h.cocycle_basis(i, k) = joint(i, chosen[k]);
    make_primitive(h.cocycle_basis, k);
  }

  // Left inverse of W = [bounds | representatives] through an invertible row subset.
  const QMatrix w = hstack<mpq_class>({bounds, h.cocycle_basis}, h.cochains);
  const std::size_t z = w.cols();
  h.coordinate_map = QMatrix(h.rank, h.cochains);
  if (z > 0) {
    QMatrix wt = w.transpose();
    const auto rows = rref(wt);
    QMatrix square(z, z);
    for (std::size_t a = 0; a < z; ++a)
      for (std::size_t b = 0; b < z; ++b) square(a, b) = w(rows[a], b);
    const auto inv = inverse(square);
    if (!inv) throw std::logic_error("cohomology: singular coordinate block");
    for (std::size_t k = 0; k < h.rank; ++k)
      for (std::size_t a = 0; a < z; ++a) h.coordinate_map(k, rows[a]) = (*inv)(bounds.cols() + k, a);
  }
  return h;
}

QMatrix induced_map(const CellularMap& f, const CohomologyPresentation& source, const CohomologyPresentation& target) {
  const int p = source.degree;
  if (target.degree != p) throw std::invalid_argument("induced_map: degree mismatch");
  const QMatrix pullback = to_q(f.chain[p]).transpose();  // C^p(target) -> C^p(source)
  QMatrix m(source.rank, target.rank);
  for (std::size_t j = 0; j < target.rank; ++j) {
    const auto image = pullback.apply(target.cocycle_basis.column(j));
    const auto coords = source.coordinates(image);
    for (std::size_t i = 0; i < source.rank; ++i) m(i, j) = coords[i];
  }
  return m;
}

ReducedPresentation quotient_by_zero_eigenspace(const QMatrix& m) {
  if (m.rows() != m.cols()) throw std::invalid_argument("quotient_by_zero_eigenspace: matrix not square");
  const std::size_t n = m.rows();
  ReducedPresentation r;
  r.full_dimension = n;
  const QMatrix high = power(m, static_cast<unsigned>(n));
  r.zero_basis = kernel(high);
  r.from_reduced = image_basis(high);
  const std::size_t rk = r.from_reduced.cols();
  const QMatrix t = hstack<mpq_class>({r.zero_basis, r.from_reduced}, n);
  const auto tinv = inverse(t);
  if (!tinv) throw std::logic_error("zero space and its complement are not complementary");
  r.to_reduced = QMatrix(rk, n);
  for (std::size_t i = 0; i < rk; ++i)
    for (std::size_t j = 0; j < n; ++j) r.to_reduced(i, j) = (*tinv)(r.zero_basis.cols() + i, j);
  r.matrix = r.to_reduced * m * r.from_reduced;
  return r;
}

// ---------------------------------------------------------------------------

const char* to_string(PartKind k) {
  switch (k) {
    case PartKind::small: return "small";
    case PartKind::unit: return "unit";
    case PartKind::large_pf: return "large-pf";
    case PartKind::large_other: return "large";
  }
  return "?";
}

const char* to_string(Subspace s) {
  switch (s) {
    case Subspace::S: return "S";
    case Subspace::PF: return "PF";
    case Subspace::unit: return "unit";
    case Subspace::large: return "large";
    case Subspace::large_other: return "large-other";
  }
  return "?";
}

bool EigenStructure::in(Subspace s, const EigenPart& part) const {
  switch (s) {
    case Subspace::S: return part.kind == PartKind::small;
    case Subspace::PF: return part.kind == PartKind::large_pf;
    case Subspace::unit: return part.kind == PartKind::unit;
    case Subspace::large: return part.kind == PartKind::large_pf || part.kind == PartKind::large_other;
    case Subspace::large_other: return part.kind == PartKind::large_other;
  }
  return false;
}

std::size_t EigenStructure::dim(Subspace s) const {
  std::size_t n = 0;
  for (const auto& p : parts)
    if (in(s, p)) n += p.dim;
  return n;
}

namespace {

PartKind kind_of(const EigenRoot& r) {
  if (r.is_pf) return PartKind::large_pf;
  switch (r.enclosure.cls) {
    case RootClass::small: return PartKind::small;
    case RootClass::large: return PartKind::large_other;
    default: return PartKind::unit;
  }
}

// Real invariant subspace for a conjugation-closed set of roots, by SVD.
EigenPart numeric_part(const QMatrix& m, const std::vector<EigenRoot>& all, const std::vector<std::size_t>& roots,
                       int multiplicity) {
  const std::size_t r = m.rows();
  std::vector<std::complex<long double>> coeffs{1.0L};  // low -> high
  for (auto idx : roots) {
    const std::complex<long double> z(all[idx].enclosure.re, all[idx].enclosure.im);
    std::vector<std::complex<long double>> next(coeffs.size() + 1, 0.0L);
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      next[i + 1] += coeffs[i];
      next[i] -= z * coeffs[i];
    }
    coeffs = std::move(next);
  }
  Eigen::MatrixXd md(r, r);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < r; ++j) md(i, j) = m(i, j).get_d();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(r, r);
  Eigen::MatrixXd pw = Eigen::MatrixXd::Identity(r, r);
  for (const auto& c : coeffs) {
    g += static_cast<double>(c.real()) * pw;
    pw = pw * md;
  }
  Eigen::MatrixXd gm = Eigen::MatrixXd::Identity(r, r);
  for (int k = 0; k < multiplicity; ++k) gm = gm * g;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(gm, Eigen::ComputeFullV);
  const std::size_t k = roots.size() * multiplicity;
  Eigen::MatrixXd v = svd.matrixV().rightCols(k);
  EigenPart part;
  part.exact = false;
  part.roots = roots;
  part.dim = k;
  part.numeric = from_eigen(v);
  const Eigen::MatrixXd mv = md * v;
  const Eigen::MatrixXd leak = mv - v * (v.transpose() * mv);
  part.residual = mv.norm() > 0 ? leak.norm() / mv.norm() : leak.norm();
  return part;
}

}  // namespace

EigenStructure eigen_structure(const QMatrix& m, const std::optional<Quad>& stretch, int coefficient_dimension) {
  if (m.rows() != m.cols()) throw std::invalid_argument("eigen_structure: matrix not square");
  EigenStructure e;
  e.dimension = m.rows();
  e.coefficient_dimension = coefficient_dimension;
  const RatPoly cp = characteristic_polynomial(m);
  e.char_poly = primitive_part(cp);
  if (e.dimension > 0 && to_rational(e.char_poly) != cp) e.flags.push_back("characteristic polynomial is not integral");
  if (e.dimension == 0) {
    e.reduced = quotient_by_zero_eigenspace(m);
    return e;
  }
  e.factors = factor(e.char_poly);

  for (std::size_t f = 0; f < e.factors.size(); ++f) {
    const Factor& fac = e.factors[f];
    if (is_x(fac.poly)) {
      e.zero_multiplicity = fac.multiplicity;
      continue;
    }
    const auto encl = isolate_roots(fac.poly);
    const auto exact = exact_real_roots(fac.poly);
    for (const auto& enc : encl) {
      EigenRoot r;
      r.factor = f;
      r.enclosure = enc;
      r.multiplicity = fac.multiplicity;
      if (!exact.empty()) {
        double best = 1e300;
        for (const auto& q : exact) {
          const double dist = std::abs(q.to_double() - static_cast<double>(enc.re));
          if (dist < best) {
            best = dist;
            r.exact = q;
          }
        }
      }
      if (enc.cls == RootClass::unit_uncertain)
        e.flags.push_back("root of " + to_string(fac.poly) + " could not be separated from the unit circle");
      e.roots.push_back(r);
    }
  }

  // Perron-Frobenius root.
  if (stretch) {
    for (std::size_t i = 0; i < e.roots.size() && !e.pf_root; ++i) {
      const auto& poly = e.factors[e.roots[i].factor].poly;
      if (!evaluate(poly, *stretch).is_zero()) continue;
      double best = 1e300;
      std::size_t pick = i;
      for (std::size_t j = 0; j < e.roots.size(); ++j) {
        if (e.roots[j].factor != e.roots[i].factor) continue;
        const auto& enc = e.roots[j].enclosure;
        const double dist = std::hypot(static_cast<double>(enc.re) - stretch->to_double(), static_cast<double>(enc.im));
        if (dist < best) {
          best = dist;
          pick = j;
        }
      }
      e.pf_root = pick;
    }
    if (!e.pf_root) e.flags.push_back("stretch factor " + stretch->str() + " is not an eigenvalue of the induced map");
  } else {
    long double best = 0;
    for (std::size_t i = 0; i < e.roots.size(); ++i) {
      const auto& enc = e.roots[i].enclosure;
      if (enc.im == 0 && enc.re > best) {
        best = enc.re;
        e.pf_root = i;
      }
    }
  }
  if (e.pf_root) {
    e.roots[*e.pf_root].is_pf = true;
    const std::size_t pf_factor = e.roots[*e.pf_root].factor;
    for (auto& r : e.roots) {
      if (r.factor != pf_factor) continue;
      r.pf_conjugate = true;
      if (r.enclosure.cls == RootClass::large) ++e.b_pf;
      if (r.enclosure.cls == RootClass::small) ++e.s_pf;
    }
  }
  for (const auto& r : e.roots)
    if (r.enclosure.cls != RootClass::small) e.d_b += r.multiplicity;

  // Subspaces of the reduced presentation.
  e.reduced = quotient_by_zero_eigenspace(m);
  const QMatrix& mr = e.reduced.matrix;
  const std::size_t rdim = mr.rows();
  for (std::size_t f = 0; f < e.factors.size(); ++f) {
    const Factor& fac = e.factors[f];
    if (is_x(fac.poly)) continue;
    std::vector<std::pair<PartKind, std::vector<std::size_t>>> groups;
    for (std::size_t i = 0; i < e.roots.size(); ++i) {
      if (e.roots[i].factor != f) continue;
      const PartKind k = kind_of(e.roots[i]);
      auto it = std::find_if(groups.begin(), groups.end(), [&](const auto& g) { return g.first == k; });
      if (it == groups.end()) {
        groups.push_back({k, {i}});
      } else {
        it->second.push_back(i);
      }
    }
    if (groups.size() == 1) {
      EigenPart part;
      part.kind = groups[0].first;
      part.factor = f;
      part.roots = groups[0].second;
      const QMatrix block = power(evaluate(fac.poly, mr), static_cast<unsigned>(fac.multiplicity));
      part.basis = to_quad(kernel(block));
      part.dim = part.basis.cols();
      part.numeric = quad_to_double(part.basis);
      e.parts.push_back(std::move(part));
      continue;
    }
    bool all_exact = true;
    for (const auto& g : groups)
      for (auto i : g.second) all_exact = all_exact && e.roots[i].exact.has_value();
    for (const auto& g : groups) {
      EigenPart part;
      if (all_exact && fac.poly.size() == 3) {
        std::vector<QuadMatrix> blocks;
        for (auto i : g.second) {
          QuadMatrix shifted = to_quad(mr);
          for (std::size_t d = 0; d < rdim; ++d) shifted(d, d) -= *e.roots[i].exact;
          blocks.push_back(kernel(power(shifted, static_cast<unsigned>(fac.multiplicity))));
        }
        part.basis = hstack(blocks, rdim);
        part.dim = part.basis.cols();
        part.numeric = quad_to_double(part.basis);
        part.roots = g.second;
      } else {
        part = numeric_part(mr, e.roots, g.second, fac.multiplicity);
      }
      part.kind = g.first;
      part.factor = f;
      e.parts.push_back(std::move(part));
    }
  }
  std::sort(e.parts.begin(), e.parts.end(), [](const EigenPart& a, const EigenPart& b) {
    return std::tie(a.kind, a.factor) < std::tie(b.kind, b.factor);
  });

  std::size_t total = 0;
  for (const auto& p : e.parts) {
    total += p.dim;
    e.exact = e.exact && p.exact;
    if (!p.exact && p.residual > 1e-9) e.flags.push_back("numeric eigenspace residual above 1e-9");
  }
  if (total != rdim) {
    e.flags.push_back("eigenspace dimensions do not add up to the reduced rank");
    e.exact = false;
  }

  std::vector<DMatrix> numeric_blocks;
  for (const auto& p : e.parts) numeric_blocks.push_back(p.numeric);
  e.numeric_basis = hstack(numeric_blocks, rdim);
  if (rdim > 0 && total == rdim) {
    const Eigen::MatrixXd nb = to_eigen(e.numeric_basis);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(nb);
    const auto sv = svd.singularValues();
    e.condition = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    e.numeric_inverse = from_eigen(nb.inverse());
    if (e.condition > 1e12) e.flags.push_back("degenerate projector: condition estimate above 1e12");
  }
  if (e.exact && total == rdim) {
    try {
      std::vector<QuadMatrix> blocks;
      for (const auto& p : e.parts) blocks.push_back(p.basis);
      e.basis = hstack(blocks, rdim);
      auto inv = inverse(e.basis);
      if (!inv) throw std::logic_error("eigenbasis is singular");
      e.basis_inverse = std::move(*inv);
    } catch (const FieldMismatch&) {
      e.exact = false;  // parts live in different quadratic fields
    }
  }
  return e;
}

std::optional<std::vector<Quad>> part_coefficients(const std::vector<Quad>& v, const EigenStructure& e) {
  if (!e.exact) return std::nullopt;
  return e.basis_inverse.apply(v);
}

Projection subspace_project(const std::vector<Quad>& v, const EigenStructure& e, Subspace which) {
  if (v.size() != e.reduced.rank()) throw std::invalid_argument("subspace_project: vector not in reduced coordinates");
  if (!e.exact) return subspace_project(to_double(v), e, which);
  Projection out;
  try {
    auto c = e.basis_inverse.apply(v);
    std::size_t at = 0;
    for (const auto& p : e.parts) {
      if (!e.in(which, p))
        for (std::size_t k = 0; k < p.dim; ++k) c[at + k] = Quad();
      at += p.dim;
    }
    out.value = e.basis.apply(c);
    out.numeric = to_double(out.value);
  } catch (const FieldMismatch&) {
    return subspace_project(to_double(v), e, which);
  }
  return out;
}

Projection subspace_project(const std::vector<double>& v, const EigenStructure& e, Subspace which) {
  if (v.size() != e.reduced.rank()) throw std::invalid_argument("subspace_project: vector not in reduced coordinates");
  Projection out;
  out.exact = false;
  if (v.empty()) return out;
  auto c = e.numeric_inverse.apply(v);
  std::size_t at = 0;
  for (const auto& p : e.parts) {
    if (!e.in(which, p))
      for (std::size_t k = 0; k < p.dim; ++k) c[at + k] = 0;
    at += p.dim;
  }
  out.numeric = e.numeric_basis.apply(c);
  return out;
}

}  // namespace tiledeform
