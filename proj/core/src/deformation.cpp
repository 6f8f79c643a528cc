#include "tiledeform/deformation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace tiledeform {

const char* to_string(Admissible a) {
  switch (a) {
    case Admissible::yes: return "yes";
    case Admissible::no: return "no";
    case Admissible::unchecked: return "unchecked";
  }
  return "?";
}

const char* to_string(Relation r) {
  switch (r) {
    case Relation::mld: return "MLD";
    case Relation::conjugate: return "conjugate";
    case Relation::conjugate_up_to_linear: return "conjugate-up-to-linear";
    case Relation::not_locally_conjugate: return "not-locally-conjugate";
    case Relation::inconclusive: return "inconclusive";
  }
  return "?";
}

const CellComplex& shape_complex(const ShapeParameter& f, const TilingSystem& s) {
  if (f.level == 0 && s.level != -1) {
    if (!s.base) throw std::invalid_argument("system has no level-0 complex");
    return *s.base->complex;
  }
  if (f.level != s.level)
    throw std::invalid_argument("shape level " + std::to_string(f.level) + " does not match the system (level " +
                                std::to_string(s.level) + ")");
  return *s.gamma;
}

namespace {

double norm(const std::vector<std::vector<Quad>>& comps) {
  long double acc = 0;
  for (const auto& c : comps)
    for (const auto& x : c) {
      const long double v = x.to_long_double();
      acc += v * v;
    }
  return static_cast<double>(std::sqrt(acc));
}

double norm(const std::vector<Quad>& v) { return norm(std::vector<std::vector<Quad>>{v}); }

Quad value_from_json(const json& j, const std::string& where) {
  if (j.is_number_float()) return Quad(mpq_class(j.get<double>()));
  return quad_from_json(j, where);
}

// Exact plane geometry for the polygon test.
struct P2 {
  Quad x, y;
};

Quad cross(const P2& a, const P2& b) { return a.x * b.y - a.y * b.x; }
P2 sub(const P2& a, const P2& b) { return {a.x - b.x, a.y - b.y}; }
int orient(const P2& a, const P2& b, const P2& c) { return cross(sub(b, a), sub(c, a)).sign(); }

bool on_segment(const P2& a, const P2& b, const P2& c) {
  return std::min(a.x, b.x) <= c.x && c.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= c.y &&
         c.y <= std::max(a.y, b.y);
}

bool segments_meet(const P2& a, const P2& b, const P2& c, const P2& d) {
  const int o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  if (o1 * o2 < 0 && o3 * o4 < 0) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

// Empty string when the polygon is simple and counter-clockwise.
std::string polygon_defect(const std::vector<P2>& step) {
  const std::size_t n = step.size();
  std::vector<P2> pts{{Quad(), Quad()}};
  for (const auto& s : step) pts.push_back({pts.back().x + s.x, pts.back().y + s.y});
  for (const auto& s : step)
    if (s.x.is_zero() && s.y.is_zero()) return "zero-length edge";
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = j == i + 1 || (i == 0 && j == n - 1);
      if (adjacent) {
        const P2& u = step[i];
        const P2& v = step[j];
        const Quad dot = u.x * v.x + u.y * v.y;
        if (cross(u, v).is_zero() && dot.sign() < 0) return "edge cycle doubles back on itself";
        continue;
      }
      if (segments_meet(pts[i], pts[i + 1], pts[j], pts[j + 1])) return "edge cycle self-intersects";
    }
  Quad area;
  for (std::size_t i = 0; i < n; ++i) area += cross(pts[i], pts[i + 1]);
  if (area.sign() <= 0) return "edge cycle does not wind +1";
  return "";
}

QMatrix pullback_matrix(const ZMatrix& chain) { return chain.cast<mpq_class>().transpose(); }

std::vector<Quad> sub(const std::vector<Quad>& a, const std::vector<Quad>& b) {
  std::vector<Quad> r(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

// Coefficients in the concatenated eigenpart basis restricted to one kind.
std::vector<std::size_t> part_indices(const EigenStructure& e, Subspace which) {
  std::vector<std::size_t> idx;
  std::size_t at = 0;
  for (const auto& p : e.parts) {
    if (e.in(which, p))
      for (std::size_t k = 0; k < p.dim; ++k) idx.push_back(at + k);
    at += p.dim;
  }
  return idx;
}

}  // namespace

ShapeParameter natural_shape(const TilingSystem& s) {
  ShapeParameter f;
  f.dimension = s.dimension;
  if (s.rule) {
    f.level = 0;
    const CellComplex& cx = *s.base->complex;
    for (const auto& cell : cx.cells[1]) {
      if (s.dimension == 1) {
        f.values.push_back({s.rule->prototiles[s.rule->index_of(cell.id)].length});
      } else {
        const bool horizontal = cell.id.size() >= 3 && cell.id.compare(cell.id.size() - 3, 3, ",x)") == 0;
        f.values.push_back(horizontal ? std::vector<Quad>{Quad(1L), Quad()} : std::vector<Quad>{Quad(), Quad(1L)});
      }
    }
  } else {
    f.level = -1;
    if (!s.geometry.is_object() || !s.geometry.contains("edges"))
      throw SchemaError("fixture.geometry.edges", "fixture carries no edge geometry for a natural shape");
    const json& edges = s.geometry.at("edges");
    for (const auto& cell : s.gamma->cells[1]) {
      if (!edges.contains(cell.id)) throw SchemaError("fixture.geometry.edges", "no vector for edge '" + cell.id + "'");
      const json& v = edges.at(cell.id);
      std::vector<Quad> comps;
      if (v.is_array()) {
        for (std::size_t j = 0; j < v.size(); ++j) comps.push_back(value_from_json(v[j], "fixture.geometry.edges"));
      } else {
        comps.push_back(value_from_json(v, "fixture.geometry.edges"));
      }
      if (static_cast<int>(comps.size()) != s.dimension)
        throw SchemaError("fixture.geometry.edges." + cell.id, "wrong number of components");
      f.values.push_back(std::move(comps));
    }
  }
  is_admissible(f, s);
  return f;
}

ShapeParameter parse_shape(const json& doc, const TilingSystem& s) {
  const std::string root = "shape";
  if (!doc.is_object()) throw SchemaError(root, "document must be a JSON object");
  ShapeParameter f;
  f.dimension = s.dimension;
  if (doc.contains("dimension") && doc.at("dimension").get<int>() != s.dimension)
    throw SchemaError(root + ".dimension", "does not match the system dimension");
  const json& lv = require(doc, "level", root);
  if (lv.is_string()) {
    if (lv.get<std::string>() != "fixture") throw SchemaError(root + ".level", "must be an integer or \"fixture\"");
    f.level = -1;
  } else {
    f.level = lv.get<int>();
  }
  const CellComplex* cx = nullptr;
  try {
    cx = &shape_complex(f, s);
  } catch (const std::invalid_argument& e) {
    throw SchemaError(root + ".level", e.what());
  }
  const json& values = require(doc, "values", root);
  if (!values.is_object()) throw SchemaError(root + ".values", "must map edge cell ids to values");
  for (const auto& [key, _] : values.items()) {
    bool known = false;
    for (const auto& c : cx->cells[1]) known = known || c.id == key;
    if (!known) throw SchemaError(root + ".values." + key, "unknown 1-cell id");
  }
  for (const auto& cell : cx->cells[1]) {
    const std::string where = root + ".values." + cell.id;
    if (!values.contains(cell.id)) throw SchemaError(where, "missing value");
    const json& v = values.at(cell.id);
    std::vector<Quad> comps;
    if (v.is_array()) {
      for (const auto& x : v) comps.push_back(value_from_json(x, where));
    } else {
      comps.push_back(value_from_json(v, where));
    }
    if (static_cast<int>(comps.size()) != s.dimension) throw SchemaError(where, "wrong number of components");
    f.values.push_back(std::move(comps));
  }
  return f;
}

json shape_to_json(const ShapeParameter& f, const TilingSystem& s) {
  const CellComplex& cx = shape_complex(f, s);
  json doc;
  doc["dimension"] = f.dimension;
  if (f.level == -1) {
    doc["level"] = "fixture";
  } else {
    doc["level"] = f.level;
  }
  json values = json::object();
  for (std::size_t c = 0; c < cx.count(1); ++c) {
    if (f.dimension == 1) {
      values[cx.cells[1][c].id] = quad_to_json(f.values[c][0]);
    } else {
      json arr = json::array();
      for (const auto& x : f.values[c]) arr.push_back(quad_to_json(x));
      values[cx.cells[1][c].id] = arr;
    }
  }
  doc["values"] = values;
  return doc;
}

AdmissibilityReport is_admissible(ShapeParameter& f, const TilingSystem& s) {
  AdmissibilityReport r;
  const CellComplex& cx = shape_complex(f, s);
  if (f.values.size() != cx.count(1)) throw std::invalid_argument("shape has the wrong number of edge values");
  if (cx.dimension >= 2) {
    for (std::size_t t = 0; t < cx.count(2); ++t)
      for (int j = 0; j < f.dimension; ++j) {
        Quad sum;
        for (std::size_t e = 0; e < cx.count(1); ++e)
          if (sgn(cx.boundary[2](e, t)) != 0) sum += Quad(mpz_class(cx.boundary[2](e, t))) * f.values[e][j];
        if (!sum.is_zero()) {
          r.closed = false;
          r.diagnostics.push_back("tile " + cx.cells[2][t].id + ": displacements around the boundary do not sum to zero");
          break;
        }
      }
  }
  bool checked = true;
  if (f.dimension == 1) {
    for (std::size_t e = 0; e < cx.count(1); ++e)
      if (f.values[e][0].sign() <= 0) {
        r.admissible = false;
        r.diagnostics.push_back("edge " + cx.cells[1][e].id + " has non-positive length " + f.values[e][0].str());
      }
  } else if (f.dimension == 2 && cx.dimension == 2) {
    if (cx.cycles.size() != cx.count(2)) {
      checked = false;
      r.diagnostics.push_back("tile edge order unknown; nondegeneracy unchecked");
    } else if (r.closed) {
      for (std::size_t t = 0; t < cx.count(2); ++t) {
        std::vector<P2> steps;
        for (const auto& [e, sign] : cx.cycles[t]) {
          const Quad sg(static_cast<long>(sign));
          steps.push_back({sg * f.values[e][0], sg * f.values[e][1]});
        }
        const std::string bad = polygon_defect(steps);
        if (!bad.empty()) {
          r.admissible = false;
          r.diagnostics.push_back("tile " + cx.cells[2][t].id + ": " + bad);
        }
      }
    }
  } else {
    checked = false;
  }
  r.admissible = r.admissible && r.closed;
  f.admissible = !r.admissible ? Admissible::no : (checked ? Admissible::yes : Admissible::unchecked);
  return r;
}

std::vector<std::vector<Quad>> lift(const ShapeParameter& f, const TilingSystem& s) {
  const CellComplex& cx = shape_complex(f, s);
  if (f.values.size() != cx.count(1)) throw std::invalid_argument("shape has the wrong number of edge values");
  std::vector<std::vector<Quad>> out(f.dimension, std::vector<Quad>(cx.count(1)));
  for (std::size_t e = 0; e < cx.count(1); ++e)
    for (int j = 0; j < f.dimension; ++j) out[j][e] = f.values[e][j];
  if (f.level == 0 && s.level != -1) {
    const QMatrix pb = pullback_matrix(s.to_base->chain[1]);
    for (auto& comp : out) comp = tiledeform::apply(pb, comp);
  }
  return out;
}

DeformationClass i_map(const ShapeParameter& f, const TilingSystem& s) {
  DeformationClass c;
  c.level = s.level;
  for (const auto& comp : lift(f, s)) c.coords.push_back(s.reduced_class(comp));
  return c;
}

std::optional<CoboundaryWitness> coboundary_witness(const ShapeParameter& f, const ShapeParameter& g,
                                                    const TilingSystem& s, int max_shifts) {
  auto a = lift(f, s);
  const auto b = lift(g, s);
  for (std::size_t j = 0; j < a.size(); ++j) a[j] = sub(a[j], b[j]);
  const QMatrix pb = pullback_matrix(s.sigma.chain[1]);
  for (int n = 0; n <= max_shifts; ++n) {
    CoboundaryWitness w;
    w.shifts = n;
    bool ok = true;
    for (const auto& comp : a) {
      auto beta = s.h1.coboundary_witness(comp);
      if (!beta) {
        ok = false;
        break;
      }
      w.beta.push_back(std::move(*beta));
    }
    if (ok) return w;
    for (auto& comp : a) comp = tiledeform::apply(pb, comp);
  }
  return std::nullopt;
}

bool in_negligible_space(const std::vector<Quad>& v, const TilingSystem& s, double tolerance, double* norm_out) {
  const EigenStructure& e = s.eigen;
  if (e.exact) {
    try {
      const auto p = subspace_project(v, e, Subspace::S);
      if (p.exact) {
        const auto rest = sub(v, p.value);
        if (norm_out) *norm_out = norm(rest);
        return std::all_of(rest.begin(), rest.end(), [](const Quad& x) { return x.is_zero(); });
      }
    } catch (const FieldMismatch&) {
      // values from another quadratic field: numeric test below
    }
  }
  const auto vd = to_double(v);
  const auto p = subspace_project(vd, e, Subspace::S);
  double acc = 0, ref = 0;
  for (std::size_t i = 0; i < vd.size(); ++i) {
    acc += (vd[i] - p.numeric[i]) * (vd[i] - p.numeric[i]);
    ref += vd[i] * vd[i];
  }
  if (norm_out) *norm_out = std::sqrt(acc);
  return std::sqrt(acc) <= tolerance * std::sqrt(ref);
}

ClassificationReport classify_pair(const ShapeParameter& f, const ShapeParameter& g, const TilingSystem& s,
                                   const ClassifyOptions& opt) {
  ClassificationReport rep;
  const EigenStructure& e = s.eigen;
  rep.exact = e.exact;
  rep.tolerance = e.exact ? 0 : opt.tolerance;
  const DeformationClass cf = i_map(f, s);
  const DeformationClass cg = i_map(g, s);
  const std::size_t d = cf.coords.size();
  rep.reference_norm = norm(cf.coords);
  std::vector<std::vector<Quad>> diff(d);
  for (std::size_t j = 0; j < d; ++j) diff[j] = sub(cg.coords[j], cf.coords[j]);
  rep.difference_norm = norm(diff);

  // Rung 1: equal classes.
  if (cf.coords == cg.coords) {
    rep.relation = Relation::mld;
    rep.exact = true;
    rep.tolerance = 0;
    rep.beta = coboundary_witness(f, g, s, static_cast<int>(e.zero_multiplicity) + 1);
    if (!rep.beta) rep.notes.push_back("needs deeper level: no coboundary witness after maximal pullback");
    return rep;
  }

  auto all_in_s = [&](const std::vector<std::vector<Quad>>& vs, double* total) {
    double acc = 0;
    bool ok = true;
    for (const auto& v : vs) {
      double nrm = 0;
      ok = in_negligible_space(v, s, opt.tolerance, &nrm) && ok;
      acc += nrm * nrm;
    }
    if (total) *total = std::sqrt(acc);
    return ok;
  };

  // Rung 2: a substitution shift differs by a negligible class.
  {
    auto pf = cf.coords;
    auto pg = cg.coords;
    for (int k = 0; k <= opt.k_max; ++k) {
      std::vector<std::vector<Quad>> fwd(d), bwd(d);
      for (std::size_t j = 0; j < d; ++j) {
        fwd[j] = sub(cg.coords[j], pf[j]);
        bwd[j] = sub(cf.coords[j], pg[j]);
      }
      if (all_in_s(fwd, nullptr)) {
        rep.relation = Relation::conjugate;
        rep.shift = k;
        rep.direction = +1;
        rep.remainder_norm = norm(fwd);
        return rep;
      }
      if (k > 0 && all_in_s(bwd, nullptr)) {
        rep.relation = Relation::conjugate;
        rep.shift = k;
        rep.direction = -1;
        rep.remainder_norm = norm(bwd);
        return rep;
      }
      for (std::size_t j = 0; j < d; ++j) {
        pf[j] = tiledeform::apply(e.reduced.matrix, pf[j]);
        pg[j] = tiledeform::apply(e.reduced.matrix, pg[j]);
      }
    }
  }

  // Rung 3: linear map fitted on the PF block.
  const auto pf_idx = part_indices(e, Subspace::PF);
  if (!pf_idx.empty()) {
    bool done = false;
    if (e.exact) {
      try {
        QuadMatrix pff(pf_idx.size(), d), pfg(pf_idx.size(), d);
        for (std::size_t j = 0; j < d; ++j) {
          const auto a = e.basis_inverse.apply(cf.coords[j]);
          const auto b = e.basis_inverse.apply(cg.coords[j]);
          for (std::size_t r = 0; r < pf_idx.size(); ++r) {
            pff(r, j) = a[pf_idx[r]];
            pfg(r, j) = b[pf_idx[r]];
          }
        }
        std::vector<std::vector<Quad>> lin(d, std::vector<Quad>(d));
        bool solved = rank(pff) == d;
        for (std::size_t j = 0; j < d && solved; ++j) {
          auto x = solve(pff, pfg.column(j));
          if (!x) {
            solved = false;
            break;
          }
          for (std::size_t i = 0; i < d; ++i) lin[j][i] = (*x)[i];
        }
        if (solved) {
          done = true;
          std::vector<std::vector<Quad>> rem(d);
          for (std::size_t j = 0; j < d; ++j) {
            rem[j] = cg.coords[j];
            for (std::size_t i = 0; i < d; ++i)
              for (std::size_t r = 0; r < rem[j].size(); ++r) rem[j][r] -= lin[j][i] * cf.coords[i][r];
          }
          if (all_in_s(rem, nullptr)) {
            rep.relation = Relation::conjugate_up_to_linear;
            rep.linear = lin;
            for (const auto& row : lin) {
              std::vector<double> nr;
              for (const auto& x : row) nr.push_back(x.to_double());
              rep.linear_numeric.push_back(nr);
            }
            rep.remainder_norm = norm(rem);
            return rep;
          }
        }
      } catch (const FieldMismatch&) {
        done = false;
      }
    }
    if (!done) {
      rep.exact = false;
      rep.tolerance = opt.tolerance;
      const std::size_t r = e.reduced.rank();
      Eigen::MatrixXd pff(pf_idx.size(), d), pfg(pf_idx.size(), d), cfm(r, d), cgm(r, d);
      for (std::size_t j = 0; j < d; ++j) {
        const auto fd = to_double(cf.coords[j]);
        const auto gd = to_double(cg.coords[j]);
        const auto a = e.numeric_inverse.apply(fd);
        const auto b = e.numeric_inverse.apply(gd);
        for (std::size_t q = 0; q < pf_idx.size(); ++q) {
          pff(q, j) = a[pf_idx[q]];
          pfg(q, j) = b[pf_idx[q]];
        }
        for (std::size_t q = 0; q < r; ++q) {
          cfm(q, j) = fd[q];
          cgm(q, j) = gd[q];
        }
      }
      const Eigen::MatrixXd x = pff.colPivHouseholderQr().solve(pfg);  // L^T
      const Eigen::MatrixXd rem = cgm - cfm * x;
      double nons = 0;
      for (std::size_t j = 0; j < d; ++j) {
        std::vector<double> v(r);
        for (std::size_t q = 0; q < r; ++q) v[q] = rem(q, j);
        const auto p = subspace_project(v, e, Subspace::S);
        for (std::size_t q = 0; q < r; ++q) nons += (v[q] - p.numeric[q]) * (v[q] - p.numeric[q]);
      }
      if (std::sqrt(nons) <= opt.tolerance * cgm.norm()) {
        rep.relation = Relation::conjugate_up_to_linear;
        for (std::size_t j = 0; j < d; ++j) {
          std::vector<double> row;
          for (std::size_t i = 0; i < d; ++i) row.push_back(x(i, j));
          rep.linear_numeric.push_back(row);
        }
        rep.remainder_norm = rem.norm();
        return rep;
      }
    }
  }

  // Rung 4: small perturbation with a non-negligible component.
  double obstruction = 0;
  const bool diff_in_s = all_in_s(diff, &obstruction);
  rep.obstruction_norm = obstruction;
  char buf[160];
  std::snprintf(buf, sizeof buf, "|I(g)-I(f)| <= %.3g * |I(f)| (reduced-presentation Euclidean norm)", opt.smallness);
  rep.heuristic = buf;
  if (!diff_in_s && rep.difference_norm <= opt.smallness * rep.reference_norm) {
    rep.relation = Relation::not_locally_conjugate;
    return rep;
  }
  rep.relation = Relation::inconclusive;
  return rep;
}

DecayReport negligibility_decay_check(const std::vector<Quad>& reduced_beta,
                                      const std::vector<std::vector<mpz_class>>& cycles, const TilingSystem& s,
                                      int n_max, int fit_from) {
  DecayReport rep;
  rep.fit_from = fit_from;
  rep.fit_to = n_max;
  const std::vector<Quad> beta = s.cochain_of(reduced_beta);
  const ZMatrix& f1 = s.sigma.chain[1];
  const ZMatrix& d1 = s.gamma->boundary[1];
  for (const auto& cycle : cycles) {
    if (cycle.size() != beta.size()) throw std::invalid_argument("cycle has the wrong length");
    for (const auto& x : d1.apply(cycle))
      if (sgn(x) != 0) throw std::invalid_argument("chain passed as a recurrence is not a cycle");
    std::vector<double> row;
    std::vector<mpz_class> v = cycle;
    for (int n = 0; n <= n_max; ++n) {
      Quad val;
      for (std::size_t e = 0; e < v.size(); ++e)
        if (sgn(v[e]) != 0) val += Quad(v[e]) * beta[e];
      row.push_back(std::fabs(val.to_double()));
      v = f1.apply(v);
    }
    // least squares slope of log|value| over the fit window
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    for (int n = fit_from; n <= n_max; ++n) {
      if (!(row[n] > 0)) continue;
      const double y = std::log(row[n]);
      sx += n;
      sy += y;
      sxx += static_cast<double>(n) * n;
      sxy += n * y;
      ++cnt;
    }
    if (cnt >= 2) {
      const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
      rep.ratios.push_back(std::exp(slope));
      rep.ratio = std::max(rep.ratio.value_or(0.0), std::exp(slope));
    } else {
      rep.ratios.push_back(std::nullopt);
    }
    rep.table.push_back(std::move(row));
  }
  rep.in_s = in_negligible_space(reduced_beta, s, 1e-9);
  double small = 0;
  for (const auto& r : s.eigen.roots)
    if (r.enclosure.cls == RootClass::small) small = std::max(small, static_cast<double>(r.enclosure.modulus()));
  rep.bound = small + 0.05;
  rep.consistent = !rep.in_s || !rep.ratio || *rep.ratio <= rep.bound;
  return rep;
}

}  // namespace tiledeform
