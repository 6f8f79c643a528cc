#include "cli.hpp"

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "tiledeform/deformation.hpp"
#include "tiledeform/render.hpp"
#include "tiledeform/spectrum.hpp"

namespace tiledeform::cli {

namespace {

// Numbers are printed with 12 significant digits so reports diff cleanly.
json num(double x) {
  if (!std::isfinite(x)) return nullptr;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return std::stod(buf);
}

json nums(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(num(x));
  return out;
}

json quads(const std::vector<Quad>& v) {
  json out = json::array();
  for (const auto& q : v) out.push_back(quad_to_json(q));
  return out;
}

json rationals(const QMatrix& m) {
  json out = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c).get_str());
    out.push_back(row);
  }
  return out;
}

json integers(const ZMatrix& m) {
  json out = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c).get_si());
    out.push_back(row);
  }
  return out;
}

json mpz_list(const std::vector<mpz_class>& v) {
  json out = json::array();
  for (const auto& x : v) out.push_back(x.get_si());
  return out;
}

class Flags {
 public:
  void add(std::string kind, std::string detail) {
    for (const auto& f : list_)
      if (f.kind == kind && f.detail == detail) return;
    list_.push_back({std::move(kind), std::move(detail)});
  }
  // core flag strings mapped onto the report enumeration
  void absorb(const std::string& text) {
    if (text.find("unit circle") != std::string::npos)
      add("unit?", text);
    else if (text.find("needs deeper level") != std::string::npos)
      add("needs-deeper-level", text);
    else
      add("possibly-incomplete", text);
  }
  json to_json() const {
    json out = json::array();
    for (const auto& f : list_) out.push_back({{"kind", f.kind}, {"detail", f.detail}});
    return out;
  }
  bool empty() const { return list_.empty(); }

 private:
  std::vector<Flag> list_;
};

struct Context {
  const Request& req;
  Flags flags;
  std::vector<std::string> notes;
  std::string svg;
};

json read_document(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError(path, "cannot open file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path, std::string("not valid JSON: ") + e.what());
  }
}

TilingSystem load(Context& cx) {
  const Request& r = cx.req;
  if (r.rule.empty() == r.fixture.empty()) throw SchemaError("request", "give exactly one of --rule and --fixture");
  TilingSystem s;
  if (!r.rule.empty()) {
    const SubstitutionRule rule = parse_substitution(read_document(r.rule));
    s = build_system(rule, r.level.value_or(1));
  } else {
    if (r.level && *r.level != -1) cx.notes.push_back("--level ignored for complex fixtures");
    s = build_system(load_complex_fixture(read_document(r.fixture)));
  }
  for (const auto& f : s.flags) {
    if (f.rfind("nonperiodicity", 0) == 0)
      cx.notes.push_back(f);
    else
      cx.flags.absorb(f);
  }
  return s;
}

// "p/q", integers and plain decimals, all exact.
Quad parse_number(const std::string& token, const std::string& where) {
  const auto dot = token.find('.');
  if (dot == std::string::npos) return quad_from_json(json(token), where);
  std::string digits = token.substr(0, dot) + token.substr(dot + 1);
  std::string den = "1" + std::string(token.size() - dot - 1, '0');
  try {
    mpq_class q{mpz_class(digits), mpz_class(den)};
    q.canonicalize();
    return Quad(q);
  } catch (const std::invalid_argument&) {
    throw SchemaError(where, "not a number: '" + token + "'");
  }
}

ShapeParameter parse_shape_spec(const std::string& spec, const TilingSystem& s, const std::string& flag) {
  const std::string where = "--" + flag;
  if (spec.empty() || spec == "nat") return natural_shape(s);
  if (spec.rfind("lengths:", 0) == 0) {
    if (!s.rule || s.dimension != 1) throw SchemaError(where, "lengths: needs a one-dimensional substitution rule");
    std::vector<std::string> parts;
    std::stringstream ss(spec.substr(8));
    for (std::string item; std::getline(ss, item, ',');) parts.push_back(item);
    if (parts.size() != s.rule->size())
      throw SchemaError(where, "expected " + std::to_string(s.rule->size()) + " lengths");
    json doc = {{"level", 0}, {"values", json::object()}};
    for (std::size_t i = 0; i < parts.size(); ++i)
      doc["values"][s.rule->prototiles[i].id] = quad_to_json(parse_number(parts[i], where));
    ShapeParameter f = parse_shape(doc, s);
    is_admissible(f, s);
    return f;
  }
  ShapeParameter f = parse_shape(read_document(spec), s);
  is_admissible(f, s);
  return f;
}

json roots_json(const EigenStructure& e) {
  json out = json::array();
  for (std::size_t i = 0; i < e.roots.size(); ++i) {
    const EigenRoot& r = e.roots[i];
    json j = {{"re", num(static_cast<double>(r.enclosure.re))},
              {"im", num(static_cast<double>(r.enclosure.im))},
              {"modulus", num(static_cast<double>(r.enclosure.modulus()))},
              {"class", to_string(r.enclosure.cls)},
              {"certified", r.enclosure.certified},
              {"multiplicity", r.multiplicity},
              {"coefficient_multiplicity", r.multiplicity * e.coefficient_dimension},
              {"perron_frobenius", r.is_pf}};
    j["exact"] = r.exact ? quad_to_json(*r.exact) : json(nullptr);
    out.push_back(j);
  }
  return out;
}

json eigen_json(const EigenStructure& e) {
  json j;
  j["characteristic_polynomial"] = to_string(e.char_poly);
  j["roots"] = roots_json(e);
  j["rank"] = e.dimension;
  j["zero_multiplicity"] = e.zero_multiplicity;
  j["reduced_rank"] = e.reduced.rank();
  j["coefficient_dimension"] = e.coefficient_dimension;
  j["real_dimension"] = e.reduced.rank() * static_cast<std::size_t>(e.coefficient_dimension);
  j["d_b"] = e.d_b;
  j["b_pf"] = e.b_pf;
  j["s_pf"] = e.s_pf;
  j["subspaces"] = {{"S", e.dim(Subspace::S)},
                    {"PF", e.dim(Subspace::PF)},
                    {"unit", e.dim(Subspace::unit)},
                    {"large", e.dim(Subspace::large)}};
  j["exact"] = e.exact;
  j["condition"] = num(e.condition);
  return j;
}

json counts(const CellComplex& c) {
  json out = json::array();
  for (int p = 0; p <= c.dimension; ++p) out.push_back(c.count(p));
  return out;
}

json shape_summary(ShapeParameter& f, const TilingSystem& s) {
  const AdmissibilityReport a = is_admissible(f, s);
  return {{"shape", shape_to_json(f, s)},
          {"closed", a.closed},
          {"admissible", to_string(f.admissible)},
          {"diagnostics", a.diagnostics}};
}

json run_validate(Context& cx) {
  const Request& r = cx.req;
  json res;
  if (!r.rule.empty()) {
    const SubstitutionRule rule = parse_substitution(read_document(r.rule));
    const ValidationReport v = validate_rule(rule);
    json tiles = json::array();
    for (const auto& t : v.tiles) tiles.push_back({{"tile", t.tile}, {"status", t.status}, {"detail", t.detail}});
    const PrimitivityResult p = is_primitive(rule);
    res["valid"] = v.valid;
    res["tiles"] = tiles;
    res["substitution_matrix"] = rule.matrix;
    res["primitive"] = p.status == PrimitivityStatus::primitive       ? "primitive"
                       : p.status == PrimitivityStatus::not_primitive ? "not-primitive"
                                                                      : "indeterminate";
    if (p.status == PrimitivityStatus::primitive) res["primitivity_power"] = p.power;
    res["document"] = substitution_to_json(rule);
    if (!v.valid) throw SchemaError(r.rule, "substitution rule failed validation");
  } else {
    const ComplexFixture fx = load_complex_fixture(read_document(r.fixture));
    res["valid"] = true;
    res["cells"] = counts(*fx.complex);
    res["document"] = fixture_to_json(fx);
  }
  if (!r.f.empty() || !r.g.empty()) {
    TilingSystem s = load(cx);
    json shapes = json::object();
    if (!r.f.empty()) {
      ShapeParameter f = parse_shape_spec(r.f, s, "f");
      shapes["f"] = shape_summary(f, s);
    }
    if (!r.g.empty()) {
      ShapeParameter g = parse_shape_spec(r.g, s, "g");
      shapes["g"] = shape_summary(g, s);
    }
    res["shapes"] = shapes;
  }
  return res;
}

json run_complex(Context& cx) {
  const TilingSystem s = load(cx);
  json res;
  res["level"] = s.level;
  res["cells"] = counts(*s.gamma);
  res["complex"] = complex_to_json(*s.gamma);
  res["self_map"] = chain_map_to_json(s.sigma);
  res["boundary_defect"] = boundary_defect(*s.gamma) ? json(*boundary_defect(*s.gamma)) : json(nullptr);
  res["commutation_defect"] = commutation_defect(s.sigma) ? json(*commutation_defect(s.sigma)) : json(nullptr);
  if (s.approximant) {
    const Stabilization& st = s.approximant->stabilization;
    res["stabilization"] = {{"saturated", st.saturated}, {"rounds", st.rounds}, {"placements", st.placements}};
    if (!st.note.empty()) res["stabilization"]["note"] = st.note;
  }
  return res;
}

json run_cohomology(Context& cx) {
  const TilingSystem s = load(cx);
  json res;
  res["level"] = s.level;
  res["cells"] = counts(*s.gamma);
  res["rank"] = s.h1.rank;
  res["torsion"] = mpz_list(s.h1.torsion);
  res["induced_matrix"] = rationals(s.sigma_star);
  res["reduced_matrix"] = rationals(s.eigen.reduced.matrix);
  res["eigen"] = eigen_json(s.eigen);
  res["dimension_bound"] = spectrum_dim_bound(s.eigen);
  if (s.stretch) res["stretch"] = quad_to_json(*s.stretch);
  return res;
}

json run_classify(Context& cx) {
  const Request& r = cx.req;
  if (r.g.empty()) throw SchemaError("--g", "classify needs a second shape");
  const TilingSystem s = load(cx);
  ShapeParameter f = parse_shape_spec(r.f, s, "f");
  ShapeParameter g = parse_shape_spec(r.g, s, "g");
  ClassifyOptions opt;
  opt.k_max = r.k_max;
  const ClassificationReport rep = classify_pair(f, g, s, opt);
  json res;
  res["relation"] = to_string(rep.relation);
  res["exact"] = rep.exact;
  res["tolerance"] = num(rep.tolerance);
  res["shift"] = rep.shift;
  res["direction"] = rep.direction;
  if (rep.beta) {
    json beta = json::array();
    for (const auto& comp : rep.beta->beta) beta.push_back(quads(comp));
    res["coboundary"] = {{"shifts", rep.beta->shifts}, {"beta", beta}};
  }
  if (!rep.linear.empty()) {
    json l = json::array();
    for (const auto& row : rep.linear) l.push_back(quads(row));
    res["linear"] = l;
  } else if (!rep.linear_numeric.empty()) {
    json l = json::array();
    for (const auto& row : rep.linear_numeric) l.push_back(nums(row));
    res["linear"] = l;
  }
  res["norms"] = {{"difference", num(rep.difference_norm)},
                  {"reference", num(rep.reference_norm)},
                  {"remainder", num(rep.remainder_norm)},
                  {"obstruction", num(rep.obstruction_norm)}};
  if (!rep.heuristic.empty()) res["heuristic"] = rep.heuristic;
  auto classes = [&](const ShapeParameter& p) {
    json out = json::array();
    for (const auto& comp : i_map(p, s).coords) out.push_back(quads(comp));
    return out;
  };
  res["f"] = shape_summary(f, s);
  res["g"] = shape_summary(g, s);
  res["f"]["class"] = classes(f);
  res["g"]["class"] = classes(g);
  res["k_max"] = r.k_max;
  for (const auto& n : rep.notes) cx.flags.absorb(n);
  return res;
}

json lattice_json(const RecurrenceLattice& lat) {
  json gens = json::array();
  for (const auto& g : lat.generators)
    gens.push_back({{"start", g.start}, {"end", g.end}, {"size", g.size}, {"degree", num(g.degree)},
                    {"truncated", g.truncated}});
  json j = {{"rank", lat.rank()},
            {"basis", integers(lat.basis)},
            {"matrix", integers(lat.M)},
            {"saturation", to_string(lat.saturation)},
            {"rounds", lat.rounds},
            {"generators", gens},
            {"notes", lat.notes}};
  j["recognition_radius_estimate"] = lat.recognition_radius_estimate ? num(*lat.recognition_radius_estimate) : json(nullptr);
  return j;
}

json run_spectrum(Context& cx) {
  const Request& r = cx.req;
  const TilingSystem s = load(cx);
  RecurrenceLattice lat;
  if (s.rule && s.dimension == 1) {
    LatticeOptions opt;
    opt.budget = r.budget;
    lat = saturated_lattice(s, opt);
  } else {
    lat = homology_lattice(s);
    cx.notes.push_back("recurrence search covers one-dimensional rules; using the integral first homology");
  }
  if (lat.saturation != Saturation::saturated) cx.flags.add("possibly-incomplete", "recurrence lattice not saturated");

  ShapeParameter f = parse_shape_spec(r.f, s, "f");
  const ShapeVector L = shape_vector(f, lat, s);
  SpectrumReport rep = rationality_constraint(L, lat, s);
  test_candidates(rep, L, lat, r.m_max);
  const WeakMixingReport wm = weak_mixing_verdict(s, &f, &lat);

  json res;
  res["lattice"] = lattice_json(lat);
  res["span_check"] = span_check(lat, s);
  json lv = json::array();
  for (const auto& comp : L.L) lv.push_back(quads(comp));
  res["shape_vector"] = lv;
  json cands = json::array();
  for (const auto& c : rep.candidates) {
    json q = json::array();
    for (const auto& x : c.q) q.push_back(x.get_str());
    json cj = {{"c", quad_to_json(c.c)}, {"q", q}};
    if (c.trace) {
      json last = json::array();
      for (const auto& t : c.trace->traces) last.push_back(t.empty() ? json(nullptr) : num(t.back()));
      cj["trace"] = {{"verdict", to_string(c.trace->verdict)},
                     {"rate", c.trace->rate ? num(*c.trace->rate) : json(nullptr)},
                     {"final", last}};
    }
    cands.push_back(cj);
  }
  res["point_spectrum"] = {{"verdict", to_string(rep.verdict)},
                           {"all_nonsmall", rep.all_nonsmall},
                           {"constraint", rep.constraint},
                           {"solution_dimension", rep.solution_dimension},
                           {"candidates", cands},
                           {"notes", rep.notes}};
  res["weak_mixing"] = {{"d_b", wm.d_b},
                        {"d", wm.d},
                        {"splits", wm.splits},
                        {"generic_weak_mixing", wm.generic_weak_mixing},
                        {"notes", wm.notes}};
  res["dimension_bound"] = spectrum_dim_bound(s.eigen);
  res["m_max"] = r.m_max;
  return res;
}

CombinatorialPatch default_patch(const TilingSystem& s) {
  if (!s.rule) return fixture_patch(s);
  if (s.dimension == 2) return rule_patch(s, 0, 3, 0);
  int power = 1;
  // about forty tiles is enough to see the deformation
  while (power < 12 && iterate_patch(*s.rule, 0, power).size() < 40) ++power;
  return rule_patch(s, 0, power, 0);
}

json run_render(Context& cx) {
  const Request& r = cx.req;
  const TilingSystem s = load(cx);
  RenderStyle style;
  if (!r.style.empty()) style = parse_style(read_document(r.style));
  const CombinatorialPatch patch = default_patch(s);
  ShapeParameter f = parse_shape_spec(r.f, s, "f");
  const GeometricRealization rf = realize_patch(patch, f, s);
  json res;
  res["faces"] = patch.faces.size();
  res["vertices"] = patch.vertex_ids.size();
  auto summary = [](const GeometricRealization& g) {
    return json{{"closed", g.closed}, {"admissible", g.admissible}, {"discrepancy", num(g.discrepancy)},
                {"warnings", g.warnings}};
  };
  res["f"] = summary(rf);
  if (!r.g.empty()) {
    ShapeParameter g = parse_shape_spec(r.g, s, "g");
    res["g"] = summary(realize_patch(patch, g, s));
    cx.svg = render_deformation_pair(patch, f, g, s, style);
  } else {
    cx.svg = render_svg(rf, style);
  }
  res["style"] = style_to_json(style);
  res["svg"] = r.svg.empty() ? json(nullptr) : json(r.svg);
  res["svg_bytes"] = cx.svg.size();
  return res;
}

json request_json(const Request& r) {
  json j = {{"f", r.f}, {"k_max", r.k_max}, {"m_max", r.m_max}, {"budget", r.budget}, {"strict", r.strict}};
  if (!r.rule.empty()) j["rule"] = r.rule;
  if (!r.fixture.empty()) j["fixture"] = r.fixture;
  if (r.level) j["level"] = *r.level;
  if (!r.g.empty()) j["g"] = r.g;
  if (!r.style.empty()) j["style"] = r.style;
  return j;
}

}  // namespace

std::string dump(const json& document) { return document.dump(2) + "\n"; }

Outcome execute(const Request& req) {
  const auto t0 = std::chrono::steady_clock::now();
  Context cx{req, {}, {}, {}};
  Outcome out;
  json& rep = out.report;
  rep["schema"] = kSchemaVersion;
  rep["command"] = req.command;
  rep["request"] = request_json(req);
  try {
    if (req.command == "validate")
      rep["results"] = run_validate(cx);
    else if (req.command == "complex")
      rep["results"] = run_complex(cx);
    else if (req.command == "cohomology")
      rep["results"] = run_cohomology(cx);
    else if (req.command == "classify")
      rep["results"] = run_classify(cx);
    else if (req.command == "spectrum")
      rep["results"] = run_spectrum(cx);
    else if (req.command == "render")
      rep["results"] = run_render(cx);
    else if (req.command == "schema")
      rep["results"] = {{"document", emit_schema(req.schema)}};
    else
      throw SchemaError("command", "unknown command '" + req.command + "'");
  } catch (const SchemaError& e) {
    rep["error"] = {{"where", e.where()}, {"message", e.what()}};
    out.exit_code = kInvalid;
  } catch (const ResourceCapExceeded& e) {
    cx.flags.add("possibly-incomplete", e.what());
    rep["error"] = {{"where", "resources"}, {"message", e.what()}};
  } catch (const ComplexError& e) {
    rep["error"] = {{"where", "complex"}, {"message", e.what()}};
    out.exit_code = kInvalid;
  } catch (const std::invalid_argument& e) {
    rep["error"] = {{"where", "request"}, {"message", e.what()}};
    out.exit_code = kInvalid;
  } catch (const std::exception& e) {
    rep["error"] = {{"where", "internal"}, {"message", e.what()}};
    out.exit_code = kInternal;
  }
  if (!rep.contains("results")) rep["results"] = json::object();
  rep["flags"] = cx.flags.to_json();
  rep["notes"] = cx.notes;
  if (req.timing) {
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    rep["timing"] = {{"seconds", num(secs)}};
  }
  if (out.exit_code == kOk && req.strict && !cx.flags.empty()) out.exit_code = kIncomplete;
  out.svg = std::move(cx.svg);
  return out;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Deformations of substitution tilings: complexes, cohomology, classification, spectrum"};
  Request req;
  std::string level;
  app.add_option("command", req.command, "validate | complex | cohomology | classify | spectrum | render | schema")
      ->required();
  app.add_option("name", req.schema, "schema name for the schema command");
  app.add_option("--rule", req.rule, "substitution document");
  app.add_option("--fixture", req.fixture, "complex fixture document");
  app.add_option("--level", level, "collaring level (built systems)");
  app.add_option("--f", req.f, "shape: nat, lengths:a,b,... or a shape document");
  app.add_option("--g", req.g, "second shape, same syntax as --f");
  app.add_option("--k-max", req.k_max, "largest substitution shift tried by classify")->check(CLI::Range(0, 64));
  app.add_option("--m-max", req.m_max, "trace length for candidate eigenvalues")->check(CLI::Range(1, 400));
  app.add_option("--budget", req.budget, "largest word scanned for recurrences")->check(CLI::Range(100, 100'000'000));
  app.add_flag("--strict", req.strict, "exit 3 when a result is flagged incomplete");
  app.add_flag("--timing", req.timing, "add wall-clock timing to the report");
  app.add_option("--out", req.out, "report path (default stdout)");
  app.add_option("--svg", req.svg, "SVG output path for render");
  app.add_option("--style", req.style, "style document for render");
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInvalid;
  }
  if (!level.empty()) {
    try {
      std::size_t used = 0;
      req.level = level == "fixture" ? -1 : std::stoi(level, &used);
      if (level != "fixture" && used != level.size()) throw std::invalid_argument(level);
    } catch (const std::exception&) {
      err << "error: --level expects an integer\n";
      return kInvalid;
    }
  }

  Outcome o = execute(req);
  // the schema command prints the schema itself
  const json& doc = req.command == "schema" && o.exit_code == kOk ? o.report["results"]["document"] : o.report;
  if (!req.svg.empty() && !o.svg.empty()) {
    std::ofstream svg(req.svg, std::ios::binary);
    if (!svg || !(svg << o.svg)) {
      err << "error: cannot write " << req.svg << "\n";
      return kInvalid;
    }
  }
  if (req.out.empty()) {
    out << dump(doc);
  } else {
    std::ofstream f(req.out, std::ios::binary);
    if (!f || !(f << dump(doc))) {
      err << "error: cannot write " << req.out << "\n";
      return kInvalid;
    }
  }
  if (o.report.contains("error")) err << "error: " << o.report["error"]["message"].get<std::string>() << "\n";
  return o.exit_code;
}

}  // namespace tiledeform::cli
