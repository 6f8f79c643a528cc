#include "tiledeform/substitution.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace tiledeform {

namespace {

const char* mode_name(SubstitutionMode m) {
  return m == SubstitutionMode::exact_self_similar ? "exact-self-similar" : "amalgamation";
}

bool is_integer(const Quad& q) { return q.is_rational() && q.rational_part().get_den() == 1; }

std::set<Vec2i> placed_cells(const SubstitutionRule& rule, const Placement& p) {
  std::set<Vec2i> out;
  const Vec2i o{to_long(p.x), to_long(p.y)};
  for (const auto& c : rule.prototiles[p.tile].cells) out.insert(c + o);
  return out;
}

}  // namespace

long to_long(const Quad& q) {
  if (!is_integer(q) || !q.rational_part().get_num().fits_slong_p())
    throw std::invalid_argument("expected an integer coordinate, got " + q.str());
  return q.rational_part().get_num().get_si();
}

std::size_t SubstitutionRule::index_of(const std::string& id) const {
  for (std::size_t i = 0; i < prototiles.size(); ++i)
    if (prototiles[i].id == id) return i;
  throw std::out_of_range("unknown prototile id '" + id + "'");
}

long SubstitutionRule::integer_stretch() const {
  if (!is_integer(stretch) || stretch <= Quad(1L))
    throw std::invalid_argument("polyomino substitutions need an integer stretch > 1");
  return to_long(stretch);
}

std::vector<UnitEdge> polyomino_boundary(const std::vector<Vec2i>& cells) {
  std::map<std::pair<Vec2i, Vec2i>, int> directed;  // (from, to) -> count
  auto add = [&](Vec2i a, Vec2i b) {
    auto rev = directed.find({b, a});
    if (rev != directed.end()) {
      directed.erase(rev);
    } else {
      directed[{a, b}]++;
    }
  };
  std::set<Vec2i> unique(cells.begin(), cells.end());
  if (unique.size() != cells.size()) throw std::invalid_argument("polyomino has repeated cells");
  for (const auto& c : cells) {
    const Vec2i p0 = c, p1 = c + Vec2i{1, 0}, p2 = c + Vec2i{1, 1}, p3 = c + Vec2i{0, 1};
    add(p0, p1);
    add(p1, p2);
    add(p2, p3);
    add(p3, p0);
  }
  std::map<Vec2i, Vec2i> next;
  for (const auto& [edge, count] : directed) {
    if (count != 1) throw std::invalid_argument("polyomino boundary is degenerate");
    if (next.count(edge.first)) throw std::invalid_argument("polyomino boundary touches itself at a vertex");
    next[edge.first] = edge.second;
  }
  if (next.empty()) throw std::invalid_argument("polyomino has no cells");
  std::vector<UnitEdge> cycle;
  const Vec2i start = next.begin()->first;
  Vec2i at = start;
  do {
    const Vec2i to = next.at(at);
    cycle.push_back({at, to - at});
    at = to;
  } while (at != start && cycle.size() <= next.size());
  if (cycle.size() != next.size())
    throw std::invalid_argument("polyomino boundary is not a single simple cycle (holes or disconnected cells)");
  return cycle;
}

SubstitutionRule parse_substitution(const json& doc) {
  const std::string root = "substitution";
  if (!doc.is_object()) throw SchemaError(root, "document must be a JSON object");
  SubstitutionRule rule;
  rule.name = require(doc, "name", root).get<std::string>();
  const json& dim = require(doc, "dimension", root);
  if (!dim.is_number_integer() || (dim.get<int>() != 1 && dim.get<int>() != 2))
    throw SchemaError(root + ".dimension", "must be 1 or 2");
  rule.dimension = dim.get<int>();
  rule.stretch = quad_from_json(require(doc, "stretch", root), root + ".stretch");
  if (rule.stretch <= Quad(1L)) throw SchemaError(root + ".stretch", "stretch factor must exceed 1");
  const json& aperiodic = require(doc, "aperiodic_assertion", root);
  if (!aperiodic.is_boolean()) throw SchemaError(root + ".aperiodic_assertion", "must be a boolean");
  rule.aperiodic_assertion = aperiodic.get<bool>();
  if (doc.contains("mode")) {
    const std::string m = doc.at("mode").get<std::string>();
    if (m == "exact-self-similar") {
      rule.mode = SubstitutionMode::exact_self_similar;
    } else if (m == "amalgamation") {
      rule.mode = SubstitutionMode::amalgamation;
    } else {
      throw SchemaError(root + ".mode", "must be exact-self-similar or amalgamation");
    }
  }

  const json& tiles = require(doc, "prototiles", root);
  if (!tiles.is_array() || tiles.empty()) throw SchemaError(root + ".prototiles", "must be a nonempty array");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < tiles.size(); ++i) {
    const std::string where = root + ".prototiles[" + std::to_string(i) + "]";
    const json& t = tiles[i];
    Prototile p;
    p.id = require(t, "id", where).get<std::string>();
    if (!ids.insert(p.id).second) throw SchemaError(where + ".id", "duplicate prototile id '" + p.id + "'");
    p.dim = rule.dimension;
    if (rule.dimension == 1) {
      p.length = quad_from_json(require(t, "length", where), where + ".length");
      if (p.length.sign() <= 0) throw SchemaError(where + ".length", "length must be positive");
    } else {
      const json& cells = require(t, "cells", where);
      if (!cells.is_array() || cells.empty()) throw SchemaError(where + ".cells", "must be a nonempty array");
      for (const auto& c : cells) {
        if (!c.is_array() || c.size() != 2) throw SchemaError(where + ".cells", "each cell is [x, y]");
        p.cells.push_back({c[0].get<long>(), c[1].get<long>()});
      }
      std::sort(p.cells.begin(), p.cells.end());
      try {
        p.boundary = polyomino_boundary(p.cells);
      } catch (const std::invalid_argument& e) {
        throw SchemaError(where + ".cells", e.what());
      }
    }
    rule.prototiles.push_back(std::move(p));
  }

  const json& images = require(doc, "rule", root);
  if (!images.is_object()) throw SchemaError(root + ".rule", "must map prototile ids to images");
  for (const auto& [key, _] : images.items())
    if (!ids.count(key)) throw SchemaError(root + ".rule." + key, "unknown prototile id '" + key + "'");
  rule.images.resize(rule.size());
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const std::string& id = rule.prototiles[j].id;
    const std::string where = root + ".rule." + id;
    if (!images.contains(id)) throw SchemaError(where, "missing image for prototile '" + id + "'");
    const json& img = images.at(id);
    if (!img.is_array() || img.empty()) throw SchemaError(where, "image must be a nonempty array");
    Patch patch;
    if (rule.dimension == 1) {
      Quad at;
      for (const auto& sym : img) {
        const std::string s = sym.get<std::string>();
        if (!ids.count(s)) throw SchemaError(where, "unknown prototile id '" + s + "'");
        const std::size_t k = rule.index_of(s);
        patch.placements.push_back({k, at, Quad()});
        at += rule.prototiles[k].length;
      }
    } else {
      for (std::size_t k = 0; k < img.size(); ++k) {
        const std::string pw = where + "[" + std::to_string(k) + "]";
        const std::string s = require(img[k], "tile", pw).get<std::string>();
        if (!ids.count(s)) throw SchemaError(pw + ".tile", "unknown prototile id '" + s + "'");
        const json& off = require(img[k], "offset", pw);
        if (!off.is_array() || off.size() != 2) throw SchemaError(pw + ".offset", "must be [x, y]");
        patch.placements.push_back(
            {rule.index_of(s), Quad(off[0].get<long>()), Quad(off[1].get<long>())});
      }
    }
    rule.images[j] = std::move(patch);
  }

  rule.matrix = substitution_matrix(rule);
  for (const auto& p : rule.prototiles) {
    double diam = 0;
    if (rule.dimension == 1) {
      diam = p.length.to_double();
    } else {
      long x0 = p.cells.front().x, x1 = x0, y0 = p.cells.front().y, y1 = y0;
      for (const auto& c : p.cells) {
        x0 = std::min(x0, c.x);
        x1 = std::max(x1, c.x + 1);
        y0 = std::min(y0, c.y);
        y1 = std::max(y1, c.y + 1);
      }
      diam = std::hypot(static_cast<double>(x1 - x0), static_cast<double>(y1 - y0));
    }
    rule.diameter = std::max(rule.diameter, diam);
  }
  return rule;
}

SubstitutionRule parse_substitution_text(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("substitution", std::string("invalid JSON: ") + e.what());
  }
  return parse_substitution(doc);
}

json substitution_to_json(const SubstitutionRule& rule) {
  json doc;
  doc["name"] = rule.name;
  doc["dimension"] = rule.dimension;
  doc["stretch"] = quad_to_json(rule.stretch);
  doc["mode"] = mode_name(rule.mode);
  doc["aperiodic_assertion"] = rule.aperiodic_assertion;
  json tiles = json::array();
  for (const auto& p : rule.prototiles) {
    json t;
    t["id"] = p.id;
    if (rule.dimension == 1) {
      t["length"] = quad_to_json(p.length);
    } else {
      json cells = json::array();
      for (const auto& c : p.cells) cells.push_back({c.x, c.y});
      t["cells"] = cells;
    }
    tiles.push_back(t);
  }
  doc["prototiles"] = tiles;
  json images = json::object();
  for (std::size_t j = 0; j < rule.size(); ++j) {
    json img = json::array();
    for (const auto& pl : rule.images[j].placements) {
      if (rule.dimension == 1) {
        img.push_back(rule.prototiles[pl.tile].id);
      } else {
        img.push_back({{"tile", rule.prototiles[pl.tile].id}, {"offset", {to_long(pl.x), to_long(pl.y)}}});
      }
    }
    images[rule.prototiles[j].id] = img;
  }
  doc["rule"] = images;
  return doc;
}

ValidationReport validate_rule(const SubstitutionRule& rule) {
  ValidationReport report;
  for (std::size_t j = 0; j < rule.size(); ++j) {
    const Prototile& t = rule.prototiles[j];
    TileCheck check{t.id, "exact-cover", ""};
    if (rule.dimension == 1) {
      Quad total;
      for (const auto& pl : rule.images[j].placements) total += rule.prototiles[pl.tile].length;
      const Quad target = rule.stretch * t.length;
      if (rule.mode == SubstitutionMode::amalgamation) {
        check.status = "asserted-cover";
      } else if (total != target) {
        check.status = "length-mismatch";
        check.detail = "image length " + total.str() + " != stretch * length " + target.str();
      }
    } else {
      const long lam = rule.integer_stretch();
      std::map<Vec2i, std::size_t> owner;
      for (std::size_t k = 0; k < rule.images[j].size() && check.detail.empty(); ++k) {
        const Placement& pl = rule.images[j].placements[k];
        for (const auto& c : placed_cells(rule, pl)) {
          auto [it, fresh] = owner.emplace(c, k);
          if (!fresh) {
            check.status = "overlap";
            check.detail = "placements " + std::to_string(it->second) + " and " + std::to_string(k) +
                           " overlap at cell (" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
            break;
          }
        }
      }
      if (check.detail.empty() && rule.mode == SubstitutionMode::exact_self_similar) {
        std::set<Vec2i> expected;
        for (const auto& c : t.cells)
          for (long i = 0; i < lam; ++i)
            for (long k = 0; k < lam; ++k) expected.insert(c.scaled(lam) + Vec2i{i, k});
        for (const auto& c : expected)
          if (!owner.count(c)) {
            check.status = "gap";
            check.detail = "cell (" + std::to_string(c.x) + "," + std::to_string(c.y) + ") is not covered";
            break;
          }
        if (check.detail.empty())
          for (const auto& [c, k] : owner)
            if (!expected.count(c)) {
              check.status = "excess";
              check.detail = "placement " + std::to_string(k) + " leaves the scaled tile at cell (" +
                             std::to_string(c.x) + "," + std::to_string(c.y) + ")";
              break;
            }
      } else if (check.detail.empty()) {
        check.status = "asserted-cover";
      }
    }
    if (check.status != "exact-cover" && check.status != "asserted-cover") report.valid = false;
    report.tiles.push_back(std::move(check));
  }
  return report;
}

std::vector<std::vector<long>> substitution_matrix(const SubstitutionRule& rule) {
  const std::size_t n = rule.size();
  std::vector<std::vector<long>> m(n, std::vector<long>(n, 0));
  for (std::size_t j = 0; j < n; ++j)
    for (const auto& pl : rule.images[j].placements) m[pl.tile][j]++;
  return m;
}

PrimitivityResult is_primitive(const SubstitutionRule& rule, int n_max) {
  const std::size_t n = rule.size();
  using Pattern = std::vector<std::vector<bool>>;
  Pattern base(n, std::vector<bool>(n, false));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) base[i][j] = rule.matrix[i][j] > 0;
  auto positive = [](const Pattern& p) {
    for (const auto& row : p)
      for (bool b : row)
        if (!b) return false;
    return true;
  };
  std::set<Pattern> seen;
  Pattern cur = base;
  for (int k = 1; k <= n_max; ++k) {
    if (positive(cur)) return {PrimitivityStatus::primitive, k, {}};
    if (!seen.insert(cur).second) return {PrimitivityStatus::not_primitive, 0, cur};
    Pattern next(n, std::vector<bool>(n, false));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l)
        if (cur[i][l])
          for (std::size_t j = 0; j < n; ++j)
            if (base[l][j]) next[i][j] = true;
    cur = std::move(next);
  }
  return {PrimitivityStatus::indeterminate, 0, {}};
}

Patch substitute(const SubstitutionRule& rule, const Patch& patch, std::vector<std::size_t>* parents,
                 std::size_t cap) {
  std::size_t total = 0;
  for (const auto& pl : patch.placements) total += rule.images[pl.tile].size();
  if (total > cap)
    throw ResourceCapExceeded("patch would hold " + std::to_string(total) + " placements (cap " +
                              std::to_string(cap) + ")");
  Patch out;
  out.placements.reserve(total);
  if (parents) {
    parents->clear();
    parents->reserve(total);
  }
  if (rule.dimension == 1) {
    Quad at = patch.placements.empty() ? Quad() : rule.stretch * patch.placements.front().x;
    for (std::size_t i = 0; i < patch.size(); ++i) {
      for (const auto& img : rule.images[patch.placements[i].tile].placements) {
        out.placements.push_back({img.tile, at, Quad()});
        at += rule.prototiles[img.tile].length;
        if (parents) parents->push_back(i);
      }
    }
  } else {
    for (std::size_t i = 0; i < patch.size(); ++i) {
      const Placement& pl = patch.placements[i];
      const Quad ox = rule.stretch * pl.x, oy = rule.stretch * pl.y;
      for (const auto& img : rule.images[pl.tile].placements) {
        out.placements.push_back({img.tile, ox + img.x, oy + img.y});
        if (parents) parents->push_back(i);
      }
    }
  }
  return out;
}

Patch iterate_patch(const SubstitutionRule& rule, std::size_t tile, int n, std::size_t cap) {
  if (n < 0) throw std::invalid_argument("iterate_patch: n must be non-negative");
  if (tile >= rule.size()) throw std::out_of_range("iterate_patch: tile index out of range");
  Patch p;
  p.placements.push_back({tile, Quad(), Quad()});
  for (int k = 0; k < n; ++k) p = substitute(rule, p, nullptr, cap);
  return p;
}

std::optional<FixedPointSeed> seed_fixed_point(const SubstitutionRule& rule, int p_max) {
  for (int p = 1; p <= p_max; ++p) {
    for (std::size_t t = 0; t < rule.size(); ++t) {
      Patch patch;
      try {
        patch = iterate_patch(rule, t, p);
      } catch (const ResourceCapExceeded&) {
        return std::nullopt;
      }
      if (rule.dimension == 1) {
        for (std::size_t k = 1; k + 1 < patch.size(); ++k)
          if (patch.placements[k].tile == t) return FixedPointSeed{t, p, k};
      } else {
        std::set<Vec2i> covered;
        for (const auto& pl : patch.placements) {
          auto cells = placed_cells(rule, pl);
          covered.insert(cells.begin(), cells.end());
        }
        for (std::size_t k = 0; k < patch.size(); ++k) {
          if (patch.placements[k].tile != t) continue;
          bool inside = true;
          for (const auto& c : placed_cells(rule, patch.placements[k]))
            for (long dx = -1; dx <= 1 && inside; ++dx)
              for (long dy = -1; dy <= 1 && inside; ++dy)
                if (!covered.count(c + Vec2i{dx, dy})) inside = false;
          if (inside) return FixedPointSeed{t, p, k};
        }
      }
    }
  }
  return std::nullopt;
}

}  // namespace tiledeform
