#include "tiledeform/render.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <deque>
#include <set>

namespace tiledeform {

namespace {

std::size_t collared_index(const Approximant& a, std::size_t prototile) {
  for (std::size_t t = 0; t < a.tiles.size(); ++t)
    if (a.tiles[t].center == prototile) return t;
  throw ComplexError("prototile missing from the level-0 complex");
}

// Same face numbering as the complex builder: vertices and (start, axis)
// edges of the polyomino boundary, each sorted.
struct Template {
  std::vector<Vec2i> verts;
  std::vector<std::pair<Vec2i, int>> edges;
};

Template make_template(const Prototile& p) {
  Template t;
  std::set<Vec2i> verts;
  for (const auto& e : p.boundary) {
    verts.insert(e.start);
    if (e.dir.x == 1) t.edges.push_back({e.start, 0});
    if (e.dir.x == -1) t.edges.push_back({e.start + e.dir, 0});
    if (e.dir.y == 1) t.edges.push_back({e.start, 1});
    if (e.dir.y == -1) t.edges.push_back({e.start + e.dir, 1});
  }
  t.verts.assign(verts.begin(), verts.end());
  std::sort(t.edges.begin(), t.edges.end());
  return t;
}

std::size_t vertex_index(const Template& t, Vec2i v) {
  return static_cast<std::size_t>(std::lower_bound(t.verts.begin(), t.verts.end(), v) - t.verts.begin());
}

// Relabels vertices so that ids sort ascending under the given order.
template <typename Key>
void sort_vertices(CombinatorialPatch& p, const std::vector<Key>& keys) {
  std::vector<std::size_t> order(keys.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  std::vector<std::size_t> where(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) where[order[i]] = i;
  std::vector<std::string> ids(order.size());
  std::vector<long> cells(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    ids[where[i]] = p.vertex_ids[i];
    cells[where[i]] = p.vertex_cell[i];
  }
  p.vertex_ids = std::move(ids);
  p.vertex_cell = std::move(cells);
  for (auto& e : p.edges) {
    e.tail = where[e.tail];
    e.head = where[e.head];
  }
  for (auto& f : p.faces)
    for (auto& v : f.boundary) v = where[v];
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", std::fabs(x) < 5e-4 ? 0.0 : x);
  return buf;
}

std::string css_class(const std::string& id) {
  std::string out = "tile-";
  for (char c : id) out.push_back(std::isalnum(static_cast<unsigned char>(c)) ? c : '_');
  return out;
}

const char* kPalette[] = {"#e8a33d", "#4f86c6", "#7fb069", "#d1495b", "#9d79bc", "#66c2c2", "#edd382", "#8c8c8c"};

struct Shape {
  std::string prototile;
  std::vector<std::array<double, 2>> pts;
};

std::vector<Shape> shapes_of(const GeometricRealization& r) {
  std::vector<Shape> out;
  if (r.dimension == 1) {
    double lo = 0, hi = 0;
    for (const auto& p : r.points) {
      lo = std::min(lo, p[0]);
      hi = std::max(hi, p[0]);
    }
    const double h = hi > lo ? (hi - lo) / 20 : 1;
    for (const auto& f : r.faces) {
      const double a = r.points[f.boundary[0]][0], b = r.points[f.boundary[1]][0];
      out.push_back({f.prototile, {{a, 0}, {b, 0}, {b, h}, {a, h}}});
    }
  } else {
    for (const auto& f : r.faces) {
      Shape s{f.prototile, {}};
      for (auto v : f.boundary) s.pts.push_back(r.points[v]);
      out.push_back(std::move(s));
    }
  }
  return out;
}

// Inner drawing of one realization sized to the style canvas.
std::string panel(const GeometricRealization& r, const RenderStyle& st) {
  const auto shapes = shapes_of(r);
  double x0 = 0, x1 = 0, y0 = 0, y1 = 0;
  bool first = true;
  for (const auto& s : shapes)
    for (const auto& p : s.pts) {
      if (first) {
        x0 = x1 = p[0];
        y0 = y1 = p[1];
        first = false;
      }
      x0 = std::min(x0, p[0]);
      x1 = std::max(x1, p[0]);
      y0 = std::min(y0, p[1]);
      y1 = std::max(y1, p[1]);
    }
  const double bw = std::max(x1 - x0, 1e-12), bh = std::max(y1 - y0, 1e-12);
  const double sc = std::min((st.width - 2 * st.margin) / bw, (st.height - 2 * st.margin) / bh);
  std::string out = "<rect class=\"canvas\" x=\"0\" y=\"0\" width=\"" + fmt(st.width) + "\" height=\"" + fmt(st.height) +
                    "\" fill=\"" + st.background + "\"/>\n<g class=\"tiles\" stroke=\"" + st.stroke +
                    "\" stroke-width=\"" + fmt(st.stroke_width) + "\" stroke-linejoin=\"round\">\n";
  for (const auto& s : shapes) {
    out += "<polygon class=\"" + css_class(s.prototile) + "\" points=\"";
    for (std::size_t i = 0; i < s.pts.size(); ++i) {
      if (i) out += " ";
      out += fmt(st.margin + (s.pts[i][0] - x0) * sc) + "," + fmt(st.height - st.margin - (s.pts[i][1] - y0) * sc);
    }
    out += "\"/>\n";
  }
  out += "</g>\n";
  if (!r.warnings.empty()) {
    out += "<g class=\"warnings\" fill=\"#c00000\" font-family=\"monospace\" font-size=\"12\">\n";
    double y = st.margin + 12;
    for (const auto& w : r.warnings) {
      std::string esc;
      for (char c : w) {
        if (c == '<') esc += "&lt;";
        else if (c == '>') esc += "&gt;";
        else if (c == '&') esc += "&amp;";
        else esc.push_back(c);
      }
      out += "<text x=\"" + fmt(st.margin) + "\" y=\"" + fmt(y) + "\">" + esc + "</text>\n";
      y += 14;
    }
    out += "</g>\n";
  }
  return out;
}

std::string style_block(const std::vector<const GeometricRealization*>& rs, const RenderStyle& st) {
  std::set<std::string> ids;
  for (const auto* r : rs)
    for (const auto& f : r->faces) ids.insert(f.prototile);
  std::string out = "<style type=\"text/css\">\n";
  std::size_t k = 0;
  for (const auto& id : ids) {
    auto it = st.fills.find(id);
    const std::string fill = it != st.fills.end() ? it->second : kPalette[k % (sizeof kPalette / sizeof *kPalette)];
    out += "." + css_class(id) + " { fill: " + fill + "; }\n";
    ++k;
  }
  return out + "</style>\n";
}

std::string header(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         fmt(w) + "\" height=\"" + fmt(h) + "\" viewBox=\"0 0 " + fmt(w) + " " + fmt(h) + "\">\n";
}

}  // namespace

CombinatorialPatch rule_patch(const TilingSystem& s, std::size_t tile, int power, int level) {
  if (!s.rule) throw std::invalid_argument("rule_patch: system has no substitution rule");
  const SubstitutionRule& rule = *s.rule;
  if (level != 0 && (level != s.level || rule.dimension != 1))
    throw std::invalid_argument("rule_patch: collared patches are available for 1-D rules at the system level only");
  Patch patch = iterate_patch(rule, tile, power);
  CombinatorialPatch out;
  out.level = level;
  out.dimension = rule.dimension;
  const Approximant& a = level == 0 ? *s.base : *s.approximant;

  if (rule.dimension == 1) {
    std::sort(patch.placements.begin(), patch.placements.end(),
              [](const Placement& x, const Placement& y) { return x.x < y.x; });
    const std::size_t n = patch.size();
    const std::size_t k = static_cast<std::size_t>(level);
    if (n < 2 * k + 1) return out;
    bool short_ids = true;
    for (const auto& p : rule.prototiles) short_ids = short_ids && p.id.size() == 1;
    for (std::size_t i = k; i + k < n; ++i) {
      std::string enc;
      for (std::size_t m = i - k; m <= i + k; ++m) {
        if (m > i - k && !short_ids) enc += ".";
        enc += rule.prototiles[patch.placements[m].tile].id;
      }
      const std::size_t t = a.complex->index_of(1, enc);
      const std::size_t v = i - k;
      if (v == 0) {
        out.vertex_ids.push_back(std::to_string(v));
        out.vertex_cell.push_back(static_cast<long>(a.faces[t][0][0]));
      }
      out.vertex_ids.push_back(std::to_string(v + 1));
      out.vertex_cell.push_back(static_cast<long>(a.faces[t][0][1]));
      out.edges.push_back({v, v + 1, t});
      out.faces.push_back({rule.prototiles[patch.placements[i].tile].id, {v, v + 1}});
    }
    return out;  // already ordered left to right
  }

  std::map<Vec2i, std::size_t> vid;
  std::map<std::pair<Vec2i, int>, std::size_t> eid;
  std::vector<Vec2i> keys;
  auto vertex = [&](Vec2i g, std::size_t cell) {
    auto [it, fresh] = vid.emplace(g, keys.size());
    if (fresh) {
      keys.push_back(g);
      out.vertex_ids.push_back("(" + std::to_string(g.x) + "," + std::to_string(g.y) + ")");
      out.vertex_cell.push_back(static_cast<long>(cell));
    } else if (out.vertex_cell[it->second] != static_cast<long>(cell)) {
      throw ComplexError("patch vertex glued to two different 0-cells");
    }
    return it->second;
  };
  std::vector<Template> templates;
  for (const auto& p : rule.prototiles) templates.push_back(make_template(p));
  for (const auto& pl : patch.placements) {
    const Vec2i o{to_long(pl.x), to_long(pl.y)};
    const Template& tp = templates[pl.tile];
    const std::size_t t = collared_index(a, pl.tile);
    for (std::size_t f = 0; f < tp.edges.size(); ++f) {
      const auto& [start, axis] = tp.edges[f];
      const Vec2i step = axis == 0 ? Vec2i{1, 0} : Vec2i{0, 1};
      const std::size_t tail = vertex(o + start, a.faces[t][0][vertex_index(tp, start)]);
      const std::size_t head = vertex(o + start + step, a.faces[t][0][vertex_index(tp, start + step)]);
      const std::size_t cell = a.faces[t][1][f];
      auto [it, fresh] = eid.emplace(std::make_pair(o + start, axis), out.edges.size());
      if (fresh)
        out.edges.push_back({tail, head, cell});
      else if (out.edges[it->second].cell != cell)
        throw ComplexError("patch edge glued to two different 1-cells");
    }
    PatchFace face{rule.prototiles[pl.tile].id, {}};
    for (const auto& e : rule.prototiles[pl.tile].boundary)
      face.boundary.push_back(vertex(o + e.start, a.faces[t][0][vertex_index(tp, e.start)]));
    out.faces.push_back(std::move(face));
  }
  sort_vertices(out, keys);
  return out;
}

CombinatorialPatch fixture_patch(const TilingSystem& s) {
  const json& doc = s.patch;
  const std::string root = "fixture.patch";
  if (!doc.is_object()) throw SchemaError(root, "fixture carries no patch");
  CombinatorialPatch out;
  out.level = -1;
  out.dimension = s.dimension;
  const CellComplex& cx = *s.gamma;
  std::map<std::string, std::size_t> vid;
  auto vertex = [&](const json& j) {
    const std::string id = j.get<std::string>();
    auto [it, fresh] = vid.emplace(id, out.vertex_ids.size());
    if (fresh) {
      out.vertex_ids.push_back(id);
      out.vertex_cell.push_back(-1);
    }
    return it->second;
  };
  auto cell_of = [&](int p, const json& j, const std::string& where) {
    try {
      return cx.index_of(p, j.get<std::string>());
    } catch (const std::out_of_range&) {
      throw SchemaError(where, "unknown " + std::to_string(p) + "-cell '" + j.get<std::string>() + "'");
    }
  };
  const json& edges = require(doc, "edges", root);
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const json& e = edges[i];
    const std::string where = root + ".edges[" + std::to_string(i) + "]";
    if (!e.is_array() || e.size() != 3) throw SchemaError(where, "expected [tail, head, cell]");
    const std::size_t tail = vertex(e[0]);
    const std::size_t head = vertex(e[1]);
    out.edges.push_back({tail, head, cell_of(1, e[2], where)});
  }
  const json& faces = require(doc, "faces", root);
  for (std::size_t i = 0; i < faces.size(); ++i) {
    const std::string where = root + ".faces[" + std::to_string(i) + "]";
    PatchFace face;
    face.prototile = require(faces[i], "prototile", where).get<std::string>();
    for (const auto& v : require(faces[i], "boundary", where)) face.boundary.push_back(vertex(v));
    out.faces.push_back(std::move(face));
  }
  if (doc.contains("vertex_cells"))
    for (const auto& [id, c] : doc.at("vertex_cells").items()) {
      auto it = vid.find(id);
      if (it == vid.end()) throw SchemaError(root + ".vertex_cells." + id, "unknown patch vertex");
      out.vertex_cell[it->second] = static_cast<long>(cell_of(0, c, root + ".vertex_cells." + id));
    }
  sort_vertices(out, out.vertex_ids);
  return out;
}

GeometricRealization realize_patch(const CombinatorialPatch& patch, const ShapeParameter& f, const TilingSystem& s) {
  if (patch.level != f.level) throw std::invalid_argument("shape and patch live on different complexes");
  const CellComplex& cx = shape_complex(f, s);
  GeometricRealization r;
  r.dimension = f.dimension;
  r.faces = patch.faces;
  const std::size_t nv = patch.vertex_ids.size();
  if (nv == 0) return r;
  for (const auto& e : patch.edges)
    if (e.cell >= cx.count(1)) throw std::invalid_argument("patch edge refers to a missing cell");
  std::vector<std::vector<std::size_t>> adj(nv);
  for (std::size_t i = 0; i < patch.edges.size(); ++i) {
    adj[patch.edges[i].tail].push_back(i);
    adj[patch.edges[i].head].push_back(i);
  }
  std::vector<std::optional<std::vector<Quad>>> pos(nv);
  pos[0] = std::vector<Quad>(f.dimension);
  std::deque<std::size_t> queue{0};
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (auto i : adj[v]) {
      const PatchEdge& e = patch.edges[i];
      const std::size_t w = e.tail == v ? e.head : e.tail;
      if (pos[w]) continue;
      std::vector<Quad> p = *pos[v];
      for (int c = 0; c < f.dimension; ++c) {
        if (e.tail == v)
          p[c] += f.values[e.cell][c];
        else
          p[c] -= f.values[e.cell][c];
      }
      pos[w] = std::move(p);
      queue.push_back(w);
    }
  }
  for (std::size_t v = 0; v < nv; ++v) {
    if (!pos[v]) throw std::invalid_argument("patch is not connected");
    r.vertices.push_back(*pos[v]);
  }
  for (const auto& e : patch.edges)
    for (int c = 0; c < f.dimension; ++c) {
      const Quad miss = r.vertices[e.head][c] - r.vertices[e.tail][c] - f.values[e.cell][c];
      if (!miss.is_zero()) {
        r.closed = false;
        r.discrepancy = std::max(r.discrepancy, std::fabs(miss.to_double()));
      }
    }
  if (!r.closed) r.warnings.push_back("shape is not closed: vertex positions depend on the path");
  ShapeParameter copy = f;
  const auto adm = is_admissible(copy, s);
  r.admissible = adm.admissible;
  if (!adm.admissible) {
    r.warnings.push_back("inadmissible shape: faces may self-cross");
    for (const auto& d : adm.diagnostics) r.warnings.push_back(d);
  }
  // drawing frame: rows of a 2x2 matrix applied to the shape coordinates
  std::array<std::array<double, 2>, 2> frame{{{1, 0}, {0, 1}}};
  if (f.dimension == 2 && s.geometry.is_object() && s.geometry.contains("frame")) {
    const json& fr = s.geometry.at("frame");
    for (std::size_t i = 0; i < 2; ++i)
      for (std::size_t j = 0; j < 2; ++j)
        frame[i][j] = fr[i][j].is_number() ? fr[i][j].get<double>() : quad_from_json(fr[i][j], "frame").to_double();
  }
  for (const auto& p : r.vertices) {
    if (f.dimension == 1) {
      r.points.push_back({p[0].to_double(), 0});
    } else {
      const double x = p[0].to_double(), y = p[1].to_double();
      r.points.push_back({frame[0][0] * x + frame[0][1] * y, frame[1][0] * x + frame[1][1] * y});
    }
  }
  return r;
}

RenderStyle parse_style(const json& doc) {
  RenderStyle st;
  const std::string root = "style";
  if (!doc.is_object()) throw SchemaError(root, "document must be a JSON object");
  if (doc.contains("fills")) {
    if (!doc.at("fills").is_object()) throw SchemaError(root + ".fills", "must map prototile ids to colors");
    for (const auto& [k, v] : doc.at("fills").items()) st.fills[k] = v.get<std::string>();
  }
  if (doc.contains("stroke")) st.stroke = doc.at("stroke").get<std::string>();
  if (doc.contains("background")) st.background = doc.at("background").get<std::string>();
  auto num = [&](const char* key, double& out, double lo) {
    if (!doc.contains(key)) return;
    if (!doc.at(key).is_number()) throw SchemaError(root + "." + key, "must be a number");
    out = doc.at(key).get<double>();
    if (!(out >= lo)) throw SchemaError(root + "." + key, "out of range");
  };
  num("stroke_width", st.stroke_width, 0);
  num("width", st.width, 1);
  num("height", st.height, 1);
  num("margin", st.margin, 0);
  if (2 * st.margin >= std::min(st.width, st.height)) throw SchemaError(root + ".margin", "leaves no drawing area");
  return st;
}

json style_to_json(const RenderStyle& st) {
  json doc;
  doc["fills"] = st.fills;
  doc["stroke"] = st.stroke;
  doc["stroke_width"] = st.stroke_width;
  doc["width"] = st.width;
  doc["height"] = st.height;
  doc["margin"] = st.margin;
  doc["background"] = st.background;
  return doc;
}

std::string render_svg(const GeometricRealization& r, const RenderStyle& st) {
  return header(st.width, st.height) + style_block({&r}, st) + panel(r, st) + "</svg>\n";
}

std::string render_deformation_pair(const CombinatorialPatch& patch, const ShapeParameter& f, const ShapeParameter& g,
                                    const TilingSystem& s, const RenderStyle& st) {
  const auto rf = realize_patch(patch, f, s);
  const auto rg = realize_patch(patch, g, s);
  std::string out = header(2 * st.width, st.height) + style_block({&rf, &rg}, st);
  for (int i = 0; i < 2; ++i) {
    out += "<svg class=\"panel\" x=\"" + fmt(i * st.width) + "\" y=\"0\" width=\"" + fmt(st.width) + "\" height=\"" +
           fmt(st.height) + "\" viewBox=\"0 0 " + fmt(st.width) + " " + fmt(st.height) + "\">\n";
    out += panel(i == 0 ? rf : rg, st);
    out += "</svg>\n";
  }
  return out + "</svg>\n";
}

}  // namespace tiledeform
