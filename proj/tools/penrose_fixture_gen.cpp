// Writes the Penrose complex fixture: the Anderson-Putnam complex of the
// Robinson triangle substitution (inflation by the golden mean), its
// substitution chain map, natural edge geometry and a small patch.
//
// Points live in Z[zeta], zeta = exp(i pi / 5), stored in the basis
// 1, zeta, zeta^2, zeta^3 (zeta^4 = zeta^3 - zeta^2 + zeta - 1).

#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "tiledeform/json_io.hpp"
#include "tiledeform/quad.hpp"

using tiledeform::json;
using tiledeform::Quad;

namespace {

using Z4 = std::array<long, 4>;

Z4 operator+(Z4 a, const Z4& b) {
  for (int i = 0; i < 4; ++i) a[i] += b[i];
  return a;
}
Z4 operator-(Z4 a, const Z4& b) {
  for (int i = 0; i < 4; ++i) a[i] -= b[i];
  return a;
}
Z4 neg(Z4 a) {
  for (auto& x : a) x = -x;
  return a;
}

Z4 mul(const Z4& a, const Z4& b) {
  // powers 4..6 of zeta reduced into the basis
  static const std::array<Z4, 7> pw = {Z4{1, 0, 0, 0}, Z4{0, 1, 0, 0}, Z4{0, 0, 1, 0}, Z4{0, 0, 0, 1},
                                      Z4{-1, 1, -1, 1}, Z4{-1, 0, 0, 0}, Z4{0, -1, 0, 0}};
  Z4 out{0, 0, 0, 0};
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      if (a[i] && b[j])
        for (int k = 0; k < 4; ++k) out[k] += a[i] * b[j] * pw[i + j][k];
  return out;
}

const Z4 kPhi{1, 0, 1, -1};  // 1 + zeta^2 - zeta^3

Z4 zeta_pow(int k) {
  Z4 z{1, 0, 0, 0};
  for (int i = 0; i < ((k % 10) + 10) % 10; ++i) z = mul(z, Z4{0, 1, 0, 0});
  return z;
}

std::array<double, 2> embed(const Z4& z) {
  double x = 0, y = 0;
  for (int k = 0; k < 4; ++k) {
    x += z[k] * std::cos(k * M_PI / 5);
    y += z[k] * std::sin(k * M_PI / 5);
  }
  return {x, y};
}

struct Tri {
  int color;
  Z4 a, b, c;
};

std::vector<Tri> subdivide(const std::vector<Tri>& in, std::vector<std::size_t>* parent) {
  std::vector<Tri> out;
  if (parent) parent->clear();
  for (std::size_t i = 0; i < in.size(); ++i) {
    const Tri& t = in[i];
    const Z4 A = mul(kPhi, t.a), B = mul(kPhi, t.b), C = mul(kPhi, t.c);
    const std::size_t before = out.size();
    if (t.color == 0) {
      const Z4 P = A + (t.b - t.a);
      out.push_back({0, C, P, B});
      out.push_back({1, P, C, A});
    } else {
      const Z4 Q = B + (t.a - t.b);
      const Z4 R = B + (t.c - t.b);
      out.push_back({1, R, C, A});
      out.push_back({1, Q, R, B});
      out.push_back({0, R, Q, A});
    }
    if (parent)
      for (std::size_t k = before; k < out.size(); ++k) parent->push_back(i);
  }
  return out;
}

std::vector<Tri> sun() {
  std::vector<Tri> out;
  for (int i = 0; i < 10; ++i) {
    Z4 b = zeta_pow(i), c = zeta_pow(i + 1);
    if (i % 2 == 0) std::swap(b, c);
    out.push_back({0, Z4{0, 0, 0, 0}, b, c});
  }
  return out;
}

struct TypeKey {
  int color;
  Z4 ab, ac;
  auto operator<=>(const TypeKey&) const = default;
};

TypeKey key_of(const Tri& t) { return {t.color, t.b - t.a, t.c - t.a}; }

std::array<Z4, 3> verts(const Tri& t) { return {t.a, t.b, t.c}; }

bool ccw(const Tri& t) {
  const auto a = embed(t.a), b = embed(t.b), c = embed(t.c);
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) > 0;
}

struct UnionFind {
  std::vector<std::size_t> p;
  std::size_t add() {
    p.push_back(p.size());
    return p.size() - 1;
  }
  std::size_t find(std::size_t x) {
    while (p[x] != x) x = p[x] = p[p[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) p[std::max(a, b)] = std::min(a, b);
  }
};

// Edge slot i of a triangle runs from vertex i to vertex (i + 1) % 3.
struct Complex {
  std::map<TypeKey, std::size_t> types;
  std::vector<TypeKey> type_list;
  std::vector<std::size_t> vslot, eslot;  // type * 3 + i -> union-find node
  UnionFind uf;
  std::size_t glued = 0;

  std::size_t type_of(const Tri& t) {
    auto [it, fresh] = types.emplace(key_of(t), type_list.size());
    if (fresh) {
      type_list.push_back(key_of(t));
      for (int i = 0; i < 3; ++i) vslot.push_back(uf.add());
      for (int i = 0; i < 3; ++i) eslot.push_back(uf.add());
    }
    return it->second;
  }

  void glue(const std::vector<Tri>& patch) {
    std::map<Z4, std::vector<std::size_t>> at_point;
    std::map<std::pair<Z4, Z4>, std::vector<std::size_t>> at_segment;
    for (const auto& t : patch) {
      const std::size_t ty = type_of(t);
      const auto v = verts(t);
      for (int i = 0; i < 3; ++i) {
        at_point[v[i]].push_back(vslot[ty * 3 + i]);
        const Z4 p = v[i], q = v[(i + 1) % 3];
        at_segment[std::minmax(p, q)].push_back(eslot[ty * 3 + i]);
      }
    }
    for (const auto& [_, slots] : at_point)
      for (auto s : slots) uf.unite(slots[0], s);
    for (const auto& [_, slots] : at_segment) {
      if (slots.size() > 2) throw std::runtime_error("segment shared by more than two triangles");
      for (auto s : slots) uf.unite(slots[0], s);
    }
  }

  std::size_t classes() {
    std::set<std::size_t> roots;
    for (std::size_t i = 0; i < uf.p.size(); ++i) roots.insert(uf.find(i));
    return roots.size() + type_list.size();
  }
};

std::string qjson_key(const Z4& z) {
  return std::to_string(z[0]) + "_" + std::to_string(z[1]) + "_" + std::to_string(z[2]) + "_" + std::to_string(z[3]);
}

}  // namespace

int main(int argc, char** argv) {
  const std::string out_path = argc > 1 ? argv[1] : "penrose_gamma1.json";
  const int patch_power = argc > 2 ? std::stoi(argv[2]) : 4;

  // Grow until the gluing pattern stops changing for two rounds.
  Complex cx;
  std::vector<Tri> patch = sun();
  std::size_t last = 0;
  int stable = 0, n = 0;
  while (stable < 2) {
    patch = subdivide(patch, nullptr);
    ++n;
    cx.glue(patch);
    const std::size_t now = cx.classes();
    stable = now == last ? stable + 1 : 0;
    last = now;
    if (n > 14) throw std::runtime_error("gluing did not stabilize");
  }
  std::cerr << "stabilized after " << n << " substitutions, " << patch.size() << " triangles, " << cx.type_list.size()
            << " prototiles\n";

  const std::size_t nt = cx.type_list.size();
  // cells: classes of vertex and edge slots
  std::map<std::size_t, std::size_t> vclass, eclass;
  for (std::size_t s = 0; s < nt * 3; ++s) vclass.emplace(cx.uf.find(cx.vslot[s]), vclass.size());
  for (std::size_t s = 0; s < nt * 3; ++s) eclass.emplace(cx.uf.find(cx.eslot[s]), eclass.size());
  // renumber classes in first-seen order (map keys are roots; emplace keeps first index)
  auto vcell = [&](std::size_t ty, int i) { return vclass.at(cx.uf.find(cx.vslot[ty * 3 + i])); };
  auto ecell = [&](std::size_t ty, int i) { return eclass.at(cx.uf.find(cx.eslot[ty * 3 + i])); };

  // canonical direction of each edge cell, and the sign of every slot
  auto slot_dir = [&](std::size_t ty, int i) {
    const TypeKey& k = cx.type_list[ty];
    const std::array<Z4, 3> v{Z4{0, 0, 0, 0}, k.ab, k.ac};
    return v[(i + 1) % 3] - v[i];
  };
  std::vector<Z4> edir(eclass.size());
  std::vector<bool> have(eclass.size(), false);
  for (std::size_t ty = 0; ty < nt; ++ty)
    for (int i = 0; i < 3; ++i) {
      const std::size_t e = ecell(ty, i);
      Z4 d = slot_dir(ty, i);
      if (neg(d) > d) d = neg(d);
      if (have[e] && edir[e] != d) throw std::runtime_error("glued edges are not parallel");
      edir[e] = d;
      have[e] = true;
    }
  auto slot_sign = [&](std::size_t ty, int i) { return slot_dir(ty, i) == edir[ecell(ty, i)] ? 1 : -1; };

  auto tname = [&](std::size_t ty) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%s%02zu", cx.type_list[ty].color == 0 ? "r" : "b", ty);
    return std::string(buf);
  };
  auto vname = [](std::size_t v) { return "v" + std::to_string(v); };
  auto ename = [](std::size_t e) { return "e" + std::to_string(e); };

  json doc;
  doc["name"] = "penrose";
  doc["dimension"] = 2;
  doc["stretch"] = tiledeform::quad_to_json(Quad(mpq_class(1, 2), mpq_class(1, 2), 5));
  json cells;
  cells["0"] = json::array();
  cells["1"] = json::array();
  cells["2"] = json::array();
  for (std::size_t v = 0; v < vclass.size(); ++v) cells["0"].push_back(vname(v));
  for (std::size_t e = 0; e < eclass.size(); ++e) cells["1"].push_back(ename(e));
  for (std::size_t ty = 0; ty < nt; ++ty) cells["2"].push_back(tname(ty));
  doc["cells"] = cells;

  // boundaries; 2-cell triples are listed in counter-clockwise walk order
  json b1 = json::array(), b2 = json::array();
  std::vector<bool> done(eclass.size(), false);
  for (std::size_t ty = 0; ty < nt; ++ty)
    for (int i = 0; i < 3; ++i) {
      const std::size_t e = ecell(ty, i);
      if (done[e]) continue;
      done[e] = true;
      const int s = slot_sign(ty, i);
      const std::size_t tail = s > 0 ? vcell(ty, i) : vcell(ty, (i + 1) % 3);
      const std::size_t head = s > 0 ? vcell(ty, (i + 1) % 3) : vcell(ty, i);
      b1.push_back({ename(e), vname(head), 1});
      b1.push_back({ename(e), vname(tail), -1});
    }
  for (std::size_t ty = 0; ty < nt; ++ty) {
    const TypeKey& k = cx.type_list[ty];
    const bool pos = ccw(Tri{k.color, Z4{0, 0, 0, 0}, k.ab, k.ac});
    for (int step = 0; step < 3; ++step) {
      const int i = pos ? step : 2 - step;
      b2.push_back({tname(ty), ename(ecell(ty, i)), pos ? slot_sign(ty, i) : -slot_sign(ty, i)});
    }
  }
  doc["boundary"] = {{"1", b1}, {"2", b2}};

  // chain map from one instance of every prototile and its children
  std::vector<std::size_t> parent;
  const std::vector<Tri> children = subdivide(patch, &parent);
  std::vector<std::vector<std::size_t>> kids(patch.size());
  for (std::size_t c = 0; c < children.size(); ++c) kids[parent[c]].push_back(c);
  std::vector<long> instance(nt, -1);
  for (std::size_t t = 0; t < patch.size(); ++t) {
    const std::size_t ty = cx.types.at(key_of(patch[t]));
    if (instance[ty] < 0) instance[ty] = static_cast<long>(t);
  }
  std::map<std::pair<std::size_t, std::size_t>, long> m0, m1, m2;  // (source, target) -> coeff
  std::vector<long> vimg(vclass.size(), -1);
  std::vector<std::map<std::size_t, long>> eimg(eclass.size());
  std::vector<bool> eseen(eclass.size(), false);
  for (std::size_t ty = 0; ty < nt; ++ty) {
    if (instance[ty] < 0) throw std::runtime_error("prototile without an instance");
    const Tri& t = patch[instance[ty]];
    const auto pv = verts(t);
    for (auto c : kids[instance[ty]]) ++m2[{ty, cx.types.at(key_of(children[c]))}];
    for (int i = 0; i < 3; ++i) {
      // vertex: the inflated point is a vertex of some child
      const Z4 p = mul(kPhi, pv[i]);
      long img = -1;
      for (auto c : kids[instance[ty]]) {
        const auto cv = verts(children[c]);
        for (int j = 0; j < 3; ++j)
          if (cv[j] == p) img = static_cast<long>(vcell(cx.types.at(key_of(children[c])), j));
      }
      const std::size_t v = vcell(ty, i);
      if (img < 0 || (vimg[v] >= 0 && vimg[v] != img)) throw std::runtime_error("vertex image not well defined");
      vimg[v] = img;

      // edge: child edges lying on the inflated segment
      const Z4 P = mul(kPhi, pv[i]), Q = mul(kPhi, pv[(i + 1) % 3]);
      const auto ep = embed(P), eq = embed(Q);
      const double dx = eq[0] - ep[0], dy = eq[1] - ep[1], len2 = dx * dx + dy * dy;
      const int ps = slot_sign(ty, i);  // +1 when P -> Q is the canonical direction
      std::map<std::size_t, long> image;
      for (auto c : kids[instance[ty]]) {
        const Tri& ch = children[c];
        const std::size_t cty = cx.types.at(key_of(ch));
        const auto cv = verts(ch);
        for (int j = 0; j < 3; ++j) {
          auto on = [&](const Z4& z) {
            const auto e = embed(z);
            const double ux = e[0] - ep[0], uy = e[1] - ep[1];
            const double t = (ux * dx + uy * dy) / len2;
            return std::fabs(ux * dy - uy * dx) < 1e-9 * len2 && t > -1e-9 && t < 1 + 1e-9;
          };
          if (!on(cv[j]) || !on(cv[(j + 1) % 3])) continue;
          const auto a = embed(cv[j]), b = embed(cv[(j + 1) % 3]);
          const int along = (b[0] - a[0]) * dx + (b[1] - a[1]) * dy > 0 ? 1 : -1;  // slot direction vs P -> Q
          image[ecell(cty, j)] += static_cast<long>(along * slot_sign(cty, j) * ps);
        }
      }
      const std::size_t e = ecell(ty, i);
      for (auto it = image.begin(); it != image.end();) it = it->second == 0 ? image.erase(it) : std::next(it);
      if (eseen[e] && eimg[e] != image) throw std::runtime_error("edge image not well defined");
      eimg[e] = image;
      eseen[e] = true;
    }
  }
  json c0 = json::array(), c1 = json::array(), c2 = json::array();
  for (std::size_t v = 0; v < vimg.size(); ++v) c0.push_back({vname(v), vname(static_cast<std::size_t>(vimg[v])), 1});
  for (std::size_t e = 0; e < eimg.size(); ++e)
    for (const auto& [t, k] : eimg[e]) c1.push_back({ename(e), ename(t), k});
  for (const auto& [st, k] : m2) c2.push_back({tname(st.first), tname(st.second), k});
  doc["chain_map"] = {{"0", c0}, {"1", c1}, {"2", c2}};

  // natural geometry in the oblique frame {1, zeta}: z = alpha + beta zeta
  const Quad tau(mpq_class(1, 2), mpq_class(1, 2), 5);
  json edges = json::object();
  for (std::size_t e = 0; e < eclass.size(); ++e) {
    const Z4& z = edir[e];
    const Quad alpha = Quad(z[0] - z[2]) - Quad(z[3]) * tau;
    const Quad beta = Quad(z[1]) + Quad(z[2] + z[3]) * tau;
    edges[ename(e)] = {tiledeform::quad_to_json(alpha), tiledeform::quad_to_json(beta)};
  }
  doc["geometry"] = {{"dimension", 2},
                     {"frame", {{1.0, std::cos(M_PI / 5)}, {0.0, std::sin(M_PI / 5)}}},
                     {"edges", edges}};

  // a small patch around the sun centre for rendering
  std::vector<Tri> small = sun();
  for (int i = 0; i < patch_power; ++i) small = subdivide(small, nullptr);
  json pedges = json::array(), pfaces = json::array(), pcells = json::object();
  std::set<std::pair<Z4, Z4>> seen;
  for (const auto& t : small) {
    const std::size_t ty = cx.types.at(key_of(t));
    const auto v = verts(t);
    for (int i = 0; i < 3; ++i) {
      pcells["p" + qjson_key(v[i])] = vname(vcell(ty, i));
      if (!seen.insert(std::minmax(v[i], v[(i + 1) % 3])).second) continue;
      const int s = slot_sign(ty, i);
      const Z4& tail = s > 0 ? v[i] : v[(i + 1) % 3];
      const Z4& head = s > 0 ? v[(i + 1) % 3] : v[i];
      pedges.push_back({"p" + qjson_key(tail), "p" + qjson_key(head), ename(ecell(ty, i))});
    }
    json loop = json::array();
    const bool pos = ccw(t);
    for (int step = 0; step < 3; ++step) loop.push_back("p" + qjson_key(v[pos ? step : 2 - step]));
    pfaces.push_back({{"prototile", t.color == 0 ? "thin" : "thick"}, {"boundary", loop}});
  }
  doc["patch"] = {{"edges", pedges}, {"faces", pfaces}, {"vertex_cells", pcells}};

  std::ofstream(out_path) << doc.dump(1) << "\n";
  std::cerr << "wrote " << out_path << ": " << vclass.size() << " vertices, " << eclass.size() << " edges, " << nt
            << " faces; patch of " << small.size() << " triangles\n";
  return 0;
}
