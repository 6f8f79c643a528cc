#include "tiledeform/complex.hpp"

#include <algorithm>
#include <array>
#include <deque>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <unordered_map>

namespace tiledeform {

namespace {

constexpr int kMaxRounds = 40;

// ---------------------------------------------------------------------------
// Local face structure of a prototile. Positions are relative to the
// placement origin; in 1-D the "position" of vertex R is (1, 0) in tile units.

struct FaceTemplate {
  std::vector<Vec2i> verts;
  std::vector<std::pair<Vec2i, int>> edges;  // start, axis (0 = x, 1 = y)
  std::vector<std::array<std::size_t, 2>> edge_ends;
  std::vector<std::pair<std::size_t, int>> top;  // signed faces of dimension d-1

  std::size_t count(int p) const { return p == 0 ? verts.size() : edges.size(); }
};

Vec2i axis_step(int axis) { return axis == 0 ? Vec2i{1, 0} : Vec2i{0, 1}; }

FaceTemplate make_template(const SubstitutionRule& rule, std::size_t t) {
  FaceTemplate ft;
  if (rule.dimension == 1) {
    ft.verts = {{0, 0}, {1, 0}};
    ft.top = {{1, +1}, {0, -1}};
    return ft;
  }
  std::set<Vec2i> verts;
  std::vector<std::pair<std::pair<Vec2i, int>, int>> signed_edges;
  for (const auto& e : rule.prototiles[t].boundary) {
    verts.insert(e.start);
    if (e.dir.x == 1) signed_edges.push_back({{e.start, 0}, +1});
    if (e.dir.x == -1) signed_edges.push_back({{e.start + e.dir, 0}, -1});
    if (e.dir.y == 1) signed_edges.push_back({{e.start, 1}, +1});
    if (e.dir.y == -1) signed_edges.push_back({{e.start + e.dir, 1}, -1});
  }
  ft.verts.assign(verts.begin(), verts.end());
  for (const auto& [edge, _] : signed_edges) ft.edges.push_back(edge);
  std::sort(ft.edges.begin(), ft.edges.end());
  auto vidx = [&](Vec2i v) {
    return static_cast<std::size_t>(std::lower_bound(ft.verts.begin(), ft.verts.end(), v) - ft.verts.begin());
  };
  for (const auto& [start, axis] : ft.edges) ft.edge_ends.push_back({vidx(start), vidx(start + axis_step(axis))});
  for (const auto& [edge, sign] : signed_edges) {
    const auto at = std::lower_bound(ft.edges.begin(), ft.edges.end(), edge) - ft.edges.begin();
    ft.top.push_back({static_cast<std::size_t>(at), sign});
  }
  return ft;
}

std::string face_name(const SubstitutionRule& rule, const FaceTemplate& ft, int p, std::size_t f) {
  if (rule.dimension == 1) return f == 0 ? "L" : "R";
  if (p == 0) return "v(" + std::to_string(ft.verts[f].x) + "," + std::to_string(ft.verts[f].y) + ")";
  const auto& [s, axis] = ft.edges[f];
  return "e(" + std::to_string(s.x) + "," + std::to_string(s.y) + (axis == 0 ? ",x)" : ",y)");
}

// ---------------------------------------------------------------------------
// Integer patch iteration. 1-D positions are tile indices; 2-D positions are
// placement origins on the lattice.

struct Round {
  std::vector<std::size_t> tile;
  std::vector<Vec2i> pos;
  std::vector<std::size_t> parent;
  std::size_t size() const { return tile.size(); }
};

Round next_round(const SubstitutionRule& rule, const Round& r, std::size_t cap) {
  std::size_t total = 0;
  for (auto t : r.tile) total += rule.images[t].size();
  if (total > cap)
    throw ResourceCapExceeded("patch would hold " + std::to_string(total) + " placements (cap " +
                              std::to_string(cap) + ")");
  Round out;
  out.tile.reserve(total);
  out.pos.reserve(total);
  out.parent.reserve(total);
  const long lam = rule.dimension == 2 ? rule.integer_stretch() : 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    for (const auto& pl : rule.images[r.tile[i]].placements) {
      out.tile.push_back(pl.tile);
      if (rule.dimension == 1) {
        out.pos.push_back({static_cast<long>(out.pos.size()), 0});
      } else {
        out.pos.push_back(r.pos[i].scaled(lam) + Vec2i{to_long(pl.x), to_long(pl.y)});
      }
      out.parent.push_back(i);
    }
  }
  return out;
}

struct VecHash {
  std::size_t operator()(const Vec2i& v) const {
    return std::hash<long>()(v.x * 0x9E3779B97F4A7C15L) ^ std::hash<long>()(v.y + 0x632BE59BD9B4E019L);
  }
};

struct Neighborhood {
  std::vector<std::vector<std::size_t>> nb;
  std::vector<char> complete;  // every touching position is covered
};

Neighborhood neighborhood(const SubstitutionRule& rule, const Round& r) {
  Neighborhood h;
  const std::size_t n = r.size();
  h.nb.resize(n);
  h.complete.assign(n, 0);
  if (rule.dimension == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      if (i > 0) h.nb[i].push_back(i - 1);
      if (i + 1 < n) h.nb[i].push_back(i + 1);
      h.complete[i] = i > 0 && i + 1 < n;
    }
    return h;
  }
  std::unordered_map<Vec2i, std::size_t, VecHash> owner;
  owner.reserve(n * 4);
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& c : rule.prototiles[r.tile[i]].cells) owner[c + r.pos[i]] = i;
  for (std::size_t i = 0; i < n; ++i) {
    bool full = true;
    std::set<std::size_t> touching;
    for (const auto& c0 : rule.prototiles[r.tile[i]].cells) {
      const Vec2i c = c0 + r.pos[i];
      for (long dx = -1; dx <= 1; ++dx)
        for (long dy = -1; dy <= 1; ++dy) {
          auto it = owner.find(c + Vec2i{dx, dy});
          if (it == owner.end()) {
            full = false;
          } else if (it->second != i) {
            touching.insert(it->second);
          }
        }
    }
    h.nb[i].assign(touching.begin(), touching.end());
    h.complete[i] = full;
  }
  return h;
}

// ---------------------------------------------------------------------------
// Collared labels, interned across rounds so ids stay comparable.

class Labeler {
 public:
  Labeler(const SubstitutionRule& rule, int k) : rule_(rule), k_(k), ids_(k + 1), names_(k + 1), parents_(k + 1) {
    bool short_ids = true;
    for (const auto& p : rule.prototiles) short_ids = short_ids && p.id.size() == 1;
    sep_ = short_ids ? "" : ".";
  }

  // labels[j][i]: level-j label of tile i, -1 where the collar is not fully visible.
  std::vector<std::vector<int>> label(const Round& r, const Neighborhood& h) {
    const std::size_t n = r.size();
    std::vector<std::vector<int>> labels(k_ + 1, std::vector<int>(n, -1));
    for (std::size_t i = 0; i < n; ++i) labels[0][i] = intern(0, rule_.prototiles[r.tile[i]].id, -1);
    for (int j = 1; j <= k_; ++j) {
      for (std::size_t i = 0; i < n; ++i) {
        if (!h.complete[i] || labels[j - 1][i] < 0) continue;
        bool ok = true;
        for (auto m : h.nb[i]) ok = ok && labels[j - 1][m] >= 0;
        if (!ok) continue;
        std::string enc;
        if (rule_.dimension == 1) {
          for (std::size_t m = i - j; m <= i + j; ++m) {
            if (!enc.empty()) enc += sep_;
            enc += rule_.prototiles[r.tile[m]].id;
          }
        } else {
          std::vector<std::string> parts;
          for (auto m : h.nb[i]) {
            const Vec2i d = r.pos[m] - r.pos[i];
            parts.push_back(names_[j - 1][labels[j - 1][m]] + "@" + std::to_string(d.x) + "," + std::to_string(d.y));
          }
          std::sort(parts.begin(), parts.end());
          enc = names_[j - 1][labels[j - 1][i]] + "{";
          for (std::size_t q = 0; q < parts.size(); ++q) enc += (q ? ";" : "") + parts[q];
          enc += "}";
        }
        labels[j][i] = intern(j, enc, labels[j - 1][i]);
      }
    }
    return labels;
  }

  const std::string& name(int level, int id) const { return names_[level][id]; }
  int parent(int level, int id) const { return parents_[level][id]; }

 private:
  int intern(int level, const std::string& s, int parent) {
    auto [it, fresh] = ids_[level].emplace(s, static_cast<int>(names_[level].size()));
    if (fresh) {
      names_[level].push_back(s);
      parents_[level].push_back(parent);
    }
    return it->second;
  }

  const SubstitutionRule& rule_;
  int k_;
  std::string sep_;
  std::vector<std::map<std::string, int>> ids_;
  std::vector<std::vector<std::string>> names_;
  std::vector<std::vector<int>> parents_;
};

// ---------------------------------------------------------------------------
// Face gluing by coincidence of global positions.

using SlotKey = std::tuple<int, int, std::size_t>;  // label, face dimension, face index

struct GlobalKey {
  int p;
  long x, y;
  int axis;
  bool operator==(const GlobalKey&) const = default;
};

struct GlobalHash {
  std::size_t operator()(const GlobalKey& g) const {
    return VecHash()({g.x, g.y}) ^ (static_cast<std::size_t>(g.p) << 3) ^ static_cast<std::size_t>(g.axis);
  }
};

struct Gluing {
  std::map<SlotKey, std::size_t> slot;
  std::vector<SlotKey> keys;
  std::vector<std::size_t> uf;
  std::unordered_map<GlobalKey, std::size_t, GlobalHash> first;

  std::size_t find(std::size_t a) {
    while (uf[a] != a) a = uf[a] = uf[uf[a]];
    return a;
  }
  std::size_t add(const SlotKey& k) {
    auto [it, fresh] = slot.emplace(k, keys.size());
    if (fresh) {
      keys.push_back(k);
      uf.push_back(uf.size());
    }
    return it->second;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) uf[std::max(a, b)] = std::min(a, b);
  }
  // Canonical partition: each slot key paired with the smallest key of its class.
  std::vector<std::pair<SlotKey, SlotKey>> signature() {
    std::map<std::size_t, SlotKey> rep;
    for (const auto& [k, i] : slot) {
      auto r = find(i);
      if (!rep.count(r)) rep[r] = k;  // map order visits the smallest key first
    }
    std::vector<std::pair<SlotKey, SlotKey>> out;
    for (const auto& [k, i] : slot) out.push_back({k, rep[find(i)]});
    return out;
  }
};

GlobalKey global_vertex(const SubstitutionRule& rule, const Vec2i& pos, const Vec2i& local) {
  if (rule.dimension == 1) return {0, pos.x + local.x, 0, 0};
  const Vec2i g = pos + local;
  return {0, g.x, g.y, 0};
}

Gluing glue(const SubstitutionRule& rule, const std::vector<FaceTemplate>& templates, const Round& r,
            const std::vector<int>& labels) {
  Gluing g;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (labels[i] < 0) continue;
    const FaceTemplate& ft = templates[r.tile[i]];
    for (std::size_t f = 0; f < ft.verts.size(); ++f) {
      const std::size_t s = g.add({labels[i], 0, f});
      auto [it, fresh] = g.first.emplace(global_vertex(rule, r.pos[i], ft.verts[f]), s);
      if (!fresh) g.unite(it->second, s);
    }
    for (std::size_t f = 0; f < ft.edges.size(); ++f) {
      const std::size_t s = g.add({labels[i], 1, f});
      const Vec2i at = r.pos[i] + ft.edges[f].first;
      auto [it, fresh] = g.first.emplace(GlobalKey{1, at.x, at.y, ft.edges[f].second}, s);
      if (!fresh) g.unite(it->second, s);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------

struct Build {
  Approximant approx;
  // Internals kept for the self-map: the last two rounds and their labels.
  Round prev, cur;
  std::vector<int> prev_labels, cur_labels;
  Gluing gluing;
  std::map<int, std::size_t> top_index;             // label id -> top cell
  std::vector<std::size_t> class_cell;              // slot -> cell index in its dimension
  std::vector<FaceTemplate> templates;
  bool have_prev = false;
};

Build run_build(const SubstitutionRule& rule, int k) {
  if (k < 0) throw std::invalid_argument("collaring depth must be non-negative");
  const auto seed = seed_fixed_point(rule);
  const auto prim = is_primitive(rule);
  if (prim.status != PrimitivityStatus::primitive) throw ComplexError("substitution is not primitive");
  if (!seed) throw ComplexError("no fixed-point seed found");

  Build b;
  for (std::size_t t = 0; t < rule.size(); ++t) b.templates.push_back(make_template(rule, t));
  Labeler labeler(rule, k);

  Round r;
  r.tile = {seed->tile};
  r.pos = {{0, 0}};
  r.parent = {0};
  const int n0 = std::max(1, prim.power);
  Stabilization& st = b.approx.stabilization;
  std::deque<std::vector<std::pair<SlotKey, SlotKey>>> history;
  Round last;
  std::vector<int> last_labels;
  bool have_last = false;
  for (int n = 0; n <= kMaxRounds; ++n) {
    if (n > 0) {
      try {
        r = next_round(rule, r, kDefaultPlacementCap);
      } catch (const ResourceCapExceeded& e) {
        st.note = e.what();
        break;
      }
    }
    if (n < n0) continue;
    const Neighborhood h = neighborhood(rule, r);
    auto labels = labeler.label(r, h);
    Gluing g = glue(rule, b.templates, r, labels[k]);
    auto sig = g.signature();
    st.rounds = n;
    st.placements = r.size();
    history.push_back(std::move(sig));
    if (history.size() > 3) history.pop_front();
    b.prev = std::move(last);
    b.prev_labels = std::move(last_labels);
    b.have_prev = have_last;
    b.cur = r;
    b.cur_labels = labels[k];
    b.gluing = std::move(g);
    last = r;
    last_labels = labels[k];
    have_last = true;
    // parents map cur -> prev only when cur was produced from prev.
    if (history.size() == 3 && !history.back().empty() && history[0] == history[1] && history[1] == history[2]) {
      st.saturated = true;
      break;
    }
  }
  if (!st.saturated && st.note.empty())
    st.note = "collared set did not stabilize within " + std::to_string(kMaxRounds) + " rounds";
  if (b.gluing.keys.empty()) throw ComplexError("no fully collared tile found at level " + std::to_string(k));

  // Assemble cells.
  Gluing& g = b.gluing;
  const int d = rule.dimension;
  auto cell = std::make_shared<CellComplex>();
  cell->name = rule.name;
  cell->dimension = d;
  cell->level = k;
  cell->cells.assign(d + 1, {});

  std::set<int> label_ids;
  for (const auto& key : g.keys) label_ids.insert(std::get<0>(key));
  std::vector<int> tops(label_ids.begin(), label_ids.end());
  std::sort(tops.begin(), tops.end(),
            [&](int a, int c) { return labeler.name(k, a) < labeler.name(k, c); });
  auto slot_tile = [&](int label) {
    // prototile of a label: walk down to level 0
    int id = label;
    for (int j = k; j > 0; --j) id = labeler.parent(j, id);
    return rule.index_of(labeler.name(0, id));
  };
  for (std::size_t t = 0; t < tops.size(); ++t) {
    b.top_index[tops[t]] = t;
    const std::string& enc = labeler.name(k, tops[t]);
    cell->cells[d].push_back({d, enc, enc});
    CollaredPrototile cp;
    cp.center = slot_tile(tops[t]);
    cp.level = k;
    cp.encoding = enc;
    if (k > 0) cp.parent = labeler.name(k - 1, labeler.parent(k, tops[t]));
    b.approx.tiles.push_back(cp);
  }

  // Lower cells: one per gluing class, named by the smallest member.
  std::map<std::size_t, std::pair<int, std::string>> class_name;  // root -> (dim, name)
  for (std::size_t s = 0; s < g.keys.size(); ++s) {
    const auto& [label, p, f] = g.keys[s];
    const std::string nm = labeler.name(k, label) + "/" + face_name(rule, b.templates[slot_tile(label)], p, f);
    auto root = g.find(s);
    auto it = class_name.find(root);
    if (it == class_name.end()) {
      class_name[root] = {p, nm};
    } else if (nm < it->second.second) {
      it->second.second = nm;
    }
  }
  std::vector<std::vector<std::pair<std::string, std::size_t>>> by_dim(d);
  for (const auto& [root, dn] : class_name) by_dim[dn.first].push_back({dn.second, root});
  std::map<std::size_t, std::size_t> root_cell;
  for (int p = 0; p < d; ++p) {
    std::sort(by_dim[p].begin(), by_dim[p].end());
    for (std::size_t c = 0; c < by_dim[p].size(); ++c) {
      root_cell[by_dim[p][c].second] = c;
      cell->cells[p].push_back({p, by_dim[p][c].first, by_dim[p][c].first});
    }
  }
  b.class_cell.resize(g.keys.size());
  for (std::size_t s = 0; s < g.keys.size(); ++s) b.class_cell[s] = root_cell.at(g.find(s));

  // Faces per top cell and boundary matrices.
  b.approx.faces.assign(tops.size(), std::vector<std::vector<std::size_t>>(d));
  for (std::size_t t = 0; t < tops.size(); ++t) {
    const FaceTemplate& ft = b.templates[b.approx.tiles[t].center];
    for (int p = 0; p < d; ++p)
      for (std::size_t f = 0; f < ft.count(p); ++f)
        b.approx.faces[t][p].push_back(b.class_cell[g.slot.at({tops[t], p, f})]);
  }
  cell->boundary.assign(d + 1, ZMatrix());
  cell->boundary[0] = ZMatrix(0, cell->count(0));
  for (int p = 1; p <= d; ++p) cell->boundary[p] = ZMatrix(cell->count(p - 1), cell->count(p));
  if (d == 2) cell->cycles.resize(tops.size());
  for (std::size_t t = 0; t < tops.size(); ++t) {
    const FaceTemplate& ft = b.templates[b.approx.tiles[t].center];
    for (const auto& [f, sign] : ft.top) {
      cell->boundary[d](b.approx.faces[t][d - 1][f], t) += sign;
      if (d == 2) cell->cycles[t].push_back({b.approx.faces[t][1][f], sign});
    }
  }
  if (d == 2) {
    std::vector<char> done(cell->count(1), 0);
    for (std::size_t t = 0; t < tops.size(); ++t) {
      const FaceTemplate& ft = b.templates[b.approx.tiles[t].center];
      for (std::size_t f = 0; f < ft.edges.size(); ++f) {
        const std::size_t e = b.approx.faces[t][1][f];
        const std::size_t v0 = b.approx.faces[t][0][ft.edge_ends[f][0]];
        const std::size_t v1 = b.approx.faces[t][0][ft.edge_ends[f][1]];
        if (done[e]) continue;
        done[e] = 1;
        cell->boundary[1](v1, e) += 1;
        cell->boundary[1](v0, e) -= 1;
      }
    }
  }
  if (auto bad = boundary_defect(*cell))
    throw ComplexError("internal: boundary composition nonzero in degree " + std::to_string(*bad));
  b.approx.complex = cell;
  return b;
}

ZMatrix zero_boundary_check(const ZMatrix& a, const ZMatrix& b) { return a * b; }

}  // namespace

std::size_t CellComplex::index_of(int p, const std::string& id) const {
  for (std::size_t i = 0; i < count(p); ++i)
    if (cells[p][i].id == id) return i;
  throw std::out_of_range("no " + std::to_string(p) + "-cell named '" + id + "'");
}

std::optional<int> boundary_defect(const CellComplex& c) {
  for (int p = 2; p <= c.dimension; ++p)
    if (!zero_boundary_check(c.boundary[p - 1], c.boundary[p]).is_zero_matrix()) return p;
  return std::nullopt;
}

std::optional<int> commutation_defect(const CellularMap& f) {
  const CellComplex& s = *f.source;
  const CellComplex& t = *f.target;
  for (int p = 1; p <= s.dimension; ++p)
    if (!(t.boundary[p] * f.chain[p] == f.chain[p - 1] * s.boundary[p])) return p;
  return std::nullopt;
}

std::vector<CollaredPrototile> enumerate_collared_prototiles(const SubstitutionRule& rule, int k,
                                                             Stabilization* info) {
  Build b = run_build(rule, k);
  if (info) *info = b.approx.stabilization;
  return b.approx.tiles;
}

Approximant build_approximant(const SubstitutionRule& rule, int k) { return run_build(rule, k).approx; }

CellComplex build_gamma(const SubstitutionRule& rule, int k) { return *run_build(rule, k).approx.complex; }

CellularMap forgetful_map(const Approximant& finer, const Approximant& coarser) {
  const CellComplex& src = *finer.complex;
  const CellComplex& tgt = *coarser.complex;
  const int d = src.dimension;
  std::map<std::string, std::size_t> coarse_index;
  for (std::size_t t = 0; t < coarser.tiles.size(); ++t) coarse_index[coarser.tiles[t].encoding] = t;
  CellularMap m{finer.complex, coarser.complex, {}};
  for (int p = 0; p <= d; ++p) m.chain.push_back(ZMatrix(tgt.count(p), src.count(p)));
  std::vector<std::vector<long>> image(d);
  for (int p = 0; p < d; ++p) image[p].assign(src.count(p), -1);
  for (std::size_t t = 0; t < finer.tiles.size(); ++t) {
    auto it = coarse_index.find(finer.tiles[t].parent);
    if (it == coarse_index.end())
      throw ComplexError("collared tile '" + finer.tiles[t].encoding + "' has no image in the coarser complex");
    m.chain[d](it->second, t) = 1;
    for (int p = 0; p < d; ++p)
      for (std::size_t f = 0; f < finer.faces[t][p].size(); ++f) {
        const std::size_t from = finer.faces[t][p][f];
        const long to = static_cast<long>(coarser.faces[it->second][p][f]);
        if (image[p][from] >= 0 && image[p][from] != to)
          throw ComplexError("forgetful map is not well defined on cell " + src.cells[p][from].id);
        image[p][from] = to;
      }
  }
  for (int p = 0; p < d; ++p)
    for (std::size_t c = 0; c < src.count(p); ++c) {
      if (image[p][c] < 0) throw ComplexError("forgetful map misses cell " + src.cells[p][c].id);
      m.chain[p](image[p][c], c) = 1;
    }
  if (auto bad = commutation_defect(m))
    throw ComplexError("internal: forgetful map does not commute in degree " + std::to_string(*bad));
  return m;
}

CellularMap forgetful_map(const SubstitutionRule& rule, int k) {
  return forgetful_map(build_approximant(rule, k + 1), build_approximant(rule, k));
}

SelfMap substitution_self_map(const SubstitutionRule& rule, int k, bool retry) {
  Build b = run_build(rule, k);
  const CellComplex& cx = *b.approx.complex;
  const int d = rule.dimension;
  try {
    if (!b.have_prev) throw ComplexError("not enough substitution rounds to build the self-map");
    std::vector<std::vector<std::size_t>> children(b.prev.size());
    for (std::size_t c = 0; c < b.cur.size(); ++c) children[b.cur.parent[c]].push_back(c);
    const long lam = d == 2 ? rule.integer_stretch() : 1;

    // images[p][cell] = sparse chain; unset until first seen
    std::vector<std::vector<std::optional<std::map<std::size_t, long>>>> images(d + 1);
    for (int p = 0; p <= d; ++p) images[p].resize(cx.count(p));
    auto record = [&](int p, std::size_t cell, std::map<std::size_t, long> chain, const std::string& what) {
      auto& slot = images[p][cell];
      if (slot && *slot != chain)
        throw AmbiguousImage("substitution image of " + what + " depends on context beyond the collar");
      slot = std::move(chain);
    };
    auto class_of = [&](const GlobalKey& key) {
      auto it = b.gluing.first.find(key);
      if (it == b.gluing.first.end()) throw ComplexError("image face lies outside the collared region");
      return b.class_cell[it->second];
    };
    auto slot_cell = [&](int label, int p, std::size_t f) {
      auto it = b.gluing.slot.find({label, p, f});
      if (it == b.gluing.slot.end()) throw ComplexError("collared tile missing from the final round");
      return b.class_cell[it->second];
    };

    for (std::size_t i = 0; i < b.prev.size(); ++i) {
      const int label = b.prev_labels[i];
      if (label < 0) continue;
      auto top = b.top_index.find(label);
      if (top == b.top_index.end()) throw ComplexError("collared tile missing from the final round");
      std::map<std::size_t, long> chain;
      for (auto c : children[i]) {
        auto ct = b.top_index.find(b.cur_labels[c]);
        if (b.cur_labels[c] < 0 || ct == b.top_index.end())
          throw AmbiguousImage("child of a collared tile has no visible collar");
        chain[ct->second] += 1;
      }
      record(d, top->second, chain, cx.cells[d][top->second].id);

      const FaceTemplate& ft = b.templates[b.prev.tile[i]];
      for (std::size_t f = 0; f < ft.verts.size(); ++f) {
        GlobalKey key;
        if (d == 1) {
          const std::size_t c = f == 0 ? children[i].front() : children[i].back();
          key = global_vertex(rule, b.cur.pos[c], ft.verts[f]);
        } else {
          const Vec2i g = (b.prev.pos[i] + ft.verts[f]).scaled(lam);
          key = {0, g.x, g.y, 0};
        }
        const std::size_t src = slot_cell(label, 0, f);
        record(0, src, {{class_of(key), 1}}, cx.cells[0][src].id);
      }
      for (std::size_t f = 0; f < ft.edges.size(); ++f) {
        const auto& [start, axis] = ft.edges[f];
        const Vec2i g0 = (b.prev.pos[i] + start).scaled(lam);
        std::map<std::size_t, long> e;
        for (long s = 0; s < lam; ++s) {
          const Vec2i g = g0 + axis_step(axis).scaled(s);
          e[class_of({1, g.x, g.y, axis})] += 1;
        }
        const std::size_t src = slot_cell(label, 1, f);
        record(1, src, e, cx.cells[1][src].id);
      }
    }

    SelfMap out;
    out.level = k;
    out.map.source = b.approx.complex;
    out.map.target = b.approx.complex;
    for (int p = 0; p <= d; ++p) {
      ZMatrix m(cx.count(p), cx.count(p));
      for (std::size_t c = 0; c < cx.count(p); ++c) {
        if (!images[p][c]) throw ComplexError("no substitution image recorded for cell " + cx.cells[p][c].id);
        for (const auto& [r, v] : *images[p][c]) m(r, c) = v;
      }
      out.map.chain.push_back(std::move(m));
    }
    if (auto bad = commutation_defect(out.map))
      throw AmbiguousImage("induced map does not commute with the boundary in degree " + std::to_string(*bad));
    out.approximant = std::move(b.approx);
    return out;
  } catch (const AmbiguousImage&) {
    if (retry && k == 1) return substitution_self_map(rule, 2, false);
    throw;
  }
}

// ---------------------------------------------------------------------------
// Fixture documents.

namespace {

std::vector<std::string> cell_ids(const json& cells, int p, const std::string& where) {
  const std::string key = std::to_string(p);
  if (!cells.contains(key)) return {};
  const json& list = cells.at(key);
  if (!list.is_array()) throw SchemaError(where + "." + key, "must be an array of cell ids");
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const auto& c : list) {
    const std::string id = c.get<std::string>();
    if (!seen.insert(id).second) throw SchemaError(where + "." + key, "duplicate cell id '" + id + "'");
    out.push_back(id);
  }
  return out;
}

ZMatrix read_triples(const json& doc, const std::string& key, int p, const CellComplex& rows_cx, int row_dim,
                     const CellComplex& cols_cx, int col_dim, const std::string& where) {
  ZMatrix m(rows_cx.count(row_dim), cols_cx.count(col_dim));
  if (!doc.contains(key) || !doc.at(key).contains(std::to_string(p))) return m;
  std::map<std::string, std::size_t> rows, cols;
  for (std::size_t i = 0; i < rows_cx.count(row_dim); ++i) rows[rows_cx.cells[row_dim][i].id] = i;
  for (std::size_t i = 0; i < cols_cx.count(col_dim); ++i) cols[cols_cx.cells[col_dim][i].id] = i;
  const std::string w = where + "." + key + "." + std::to_string(p);
  for (const auto& t : doc.at(key).at(std::to_string(p))) {
    if (!t.is_array() || t.size() != 3) throw SchemaError(w, "entries are [cell, cell, coefficient]");
    const std::string a = t[0].get<std::string>(), c = t[1].get<std::string>();
    auto ci = cols.find(a);
    if (ci == cols.end()) throw SchemaError(w, "dangling cell id '" + a + "'");
    auto ri = rows.find(c);
    if (ri == rows.end()) throw SchemaError(w, "dangling cell id '" + c + "'");
    m(ri->second, ci->second) += t[2].get<long>();
  }
  return m;
}

json triples(const ZMatrix& m, const CellComplex& rows_cx, int row_dim, const CellComplex& cols_cx, int col_dim) {
  json out = json::array();
  for (std::size_t c = 0; c < m.cols(); ++c)
    for (std::size_t r = 0; r < m.rows(); ++r)
      if (sgn(m(r, c)) != 0)
        out.push_back({cols_cx.cells[col_dim][c].id, rows_cx.cells[row_dim][r].id, m(r, c).get_si()});
  return out;
}

}  // namespace

ComplexFixture load_complex_fixture(const json& doc) {
  const std::string root = "fixture";
  if (!doc.is_object()) throw SchemaError(root, "document must be a JSON object");
  auto cx = std::make_shared<CellComplex>();
  cx->name = doc.value("name", std::string("fixture"));
  const json& dim = require(doc, "dimension", root);
  if (!dim.is_number_integer() || dim.get<int>() < 1 || dim.get<int>() > 3)
    throw SchemaError(root + ".dimension", "must be 1, 2 or 3");
  cx->dimension = dim.get<int>();
  const json& cells = require(doc, "cells", root);
  std::set<std::string> all;
  for (int p = 0; p <= cx->dimension; ++p) {
    std::vector<Cell> list;
    for (const auto& id : cell_ids(cells, p, root + ".cells")) {
      if (!all.insert(id).second) throw SchemaError(root + ".cells", "cell id '" + id + "' used in two dimensions");
      list.push_back({p, id, id});
    }
    cx->cells.push_back(std::move(list));
  }
  if (cx->count(cx->dimension) == 0) throw SchemaError(root + ".cells", "no top-dimensional cells");
  cx->boundary.push_back(ZMatrix(0, cx->count(0)));
  for (int p = 1; p <= cx->dimension; ++p)
    cx->boundary.push_back(read_triples(doc, "boundary", p, *cx, p - 1, *cx, p, root));
  if (auto bad = boundary_defect(*cx))
    throw ComplexError("boundary composition is nonzero in degree " + std::to_string(*bad));
  if (cx->dimension == 2 && doc.at("boundary").contains("2")) {
    // Listing order of the 2-cell triples is taken as the cycle order.
    cx->cycles.resize(cx->count(2));
    for (const auto& t : doc.at("boundary").at("2"))
      cx->cycles[cx->index_of(2, t[0].get<std::string>())].push_back(
          {cx->index_of(1, t[1].get<std::string>()), static_cast<int>(t[2].get<long>())});
  }

  ComplexFixture out;
  out.complex = cx;
  out.map.source = cx;
  out.map.target = cx;
  require(doc, "chain_map", root);
  for (int p = 0; p <= cx->dimension; ++p)
    out.map.chain.push_back(read_triples(doc, "chain_map", p, *cx, p, *cx, p, root));
  if (auto bad = commutation_defect(out.map))
    throw ComplexError("chain map does not commute with the boundary in degree " + std::to_string(*bad));
  if (doc.contains("stretch")) out.stretch = quad_from_json(doc.at("stretch"), root + ".stretch");
  out.geometry = doc.value("geometry", json());
  out.patch = doc.value("patch", json());
  return out;
}

json complex_to_json(const CellComplex& c) {
  json doc;
  doc["name"] = c.name;
  doc["dimension"] = c.dimension;
  doc["level"] = c.level;
  json cells = json::object();
  for (int p = 0; p <= c.dimension; ++p) {
    json list = json::array();
    for (const auto& cell : c.cells[p]) list.push_back(cell.id);
    cells[std::to_string(p)] = list;
  }
  doc["cells"] = cells;
  json bd = json::object();
  for (int p = 1; p <= c.dimension; ++p) bd[std::to_string(p)] = triples(c.boundary[p], c, p - 1, c, p);
  if (c.dimension == 2 && c.cycles.size() == c.count(2) &&
      std::all_of(c.cycles.begin(), c.cycles.end(), [](const auto& cy) { return !cy.empty(); })) {
    // keep the walk order so the cycles survive a reload
    json ordered = json::array();
    for (std::size_t f = 0; f < c.cycles.size(); ++f)
      for (const auto& [e, sign] : c.cycles[f]) ordered.push_back({c.cells[2][f].id, c.cells[1][e].id, sign});
    bd["2"] = ordered;
  }
  doc["boundary"] = bd;
  return doc;
}

json fixture_to_json(const ComplexFixture& f) {
  json doc = complex_to_json(*f.complex);
  doc.erase("level");
  doc["chain_map"] = chain_map_to_json(f.map);
  if (f.stretch) doc["stretch"] = quad_to_json(*f.stretch);
  if (!f.geometry.is_null()) doc["geometry"] = f.geometry;
  if (!f.patch.is_null()) doc["patch"] = f.patch;
  return doc;
}

json chain_map_to_json(const CellularMap& f) {
  json doc = json::object();
  for (int p = 0; p <= f.source->dimension; ++p)
    doc[std::to_string(p)] = triples(f.chain[p], *f.target, p, *f.source, p);
  return doc;
}

}  // namespace tiledeform
