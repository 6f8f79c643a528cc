#include "tiledeform/system.hpp"

namespace tiledeform {

CellularMap compose(const CellularMap& second, const CellularMap& first) {
  if (second.source != first.target && second.source->dimension != first.target->dimension)
    throw std::invalid_argument("compose: maps are not composable");
  CellularMap out{first.source, second.target, {}};
  for (std::size_t p = 0; p < first.chain.size(); ++p) out.chain.push_back(second.chain[p] * first.chain[p]);
  return out;
}

std::vector<Quad> TilingSystem::reduced_class(const std::vector<Quad>& cochain) const {
  return tiledeform::apply(eigen.reduced.to_reduced, h1.coordinates(cochain));
}

std::vector<Quad> TilingSystem::cochain_of(const std::vector<Quad>& reduced) const {
  return tiledeform::apply(h1.cocycle_basis, tiledeform::apply(eigen.reduced.from_reduced, reduced));
}

namespace {

void finish(TilingSystem& s) {
  s.h1 = cohomology(*s.gamma, 1);
  s.sigma_star = induced_map(s.sigma, s.h1, s.h1);
  s.eigen = eigen_structure(s.sigma_star, s.stretch, s.dimension);
  for (const auto& f : s.eigen.flags) s.flags.push_back(f);
}

}  // namespace

TilingSystem build_system(const SubstitutionRule& rule, int level) {
  if (level < 0) throw std::invalid_argument("build_system: level must be non-negative");
  const auto report = validate_rule(rule);
  if (!report.valid) throw ComplexError("substitution rule '" + rule.name + "' failed validation");
  TilingSystem s;
  s.name = rule.name;
  s.dimension = rule.dimension;
  s.rule = rule;
  s.stretch = rule.stretch;
  if (!rule.aperiodic_assertion) s.flags.push_back("nonperiodicity not asserted by the document");

  // only the default level may climb to level 2 on an ambiguous image
  SelfMap sm = substitution_self_map(rule, level, level == 1);
  s.level = sm.level;
  s.gamma = sm.approximant.complex;
  s.sigma = sm.map;
  if (!sm.approximant.stabilization.saturated)
    s.flags.push_back("incomplete: " + sm.approximant.stabilization.note);
  s.base = s.level == 0 ? sm.approximant : build_approximant(rule, 0);
  if (s.level == 0) {
    CellularMap id{s.gamma, s.gamma, {}};
    for (int p = 0; p <= s.gamma->dimension; ++p) id.chain.push_back(ZMatrix::identity(s.gamma->count(p)));
    s.to_base = std::move(id);
  } else {
    Approximant finer = sm.approximant;
    for (int k = s.level - 1; k >= 0; --k) {
      Approximant coarser = k == 0 ? *s.base : build_approximant(rule, k);
      CellularMap step = forgetful_map(finer, coarser);
      s.to_base = s.to_base ? compose(step, *s.to_base) : step;
      finer = std::move(coarser);
    }
  }
  s.approximant = std::move(sm.approximant);
  finish(s);
  return s;
}

TilingSystem build_system(const ComplexFixture& fx) {
  TilingSystem s;
  s.name = fx.complex->name;
  s.dimension = fx.complex->dimension;
  s.stretch = fx.stretch;
  s.gamma = fx.complex;
  s.sigma = fx.map;
  s.level = -1;
  s.geometry = fx.geometry;
  s.patch = fx.patch;
  if (fx.geometry.is_object() && fx.geometry.contains("dimension")) s.dimension = fx.geometry.at("dimension").get<int>();
  finish(s);
  return s;
}

TilingSystem load_system(const json& doc) {
  if (doc.is_object() && doc.contains("chain_map")) return build_system(load_complex_fixture(doc));
  return build_system(parse_substitution(doc));
}

}  // namespace tiledeform
