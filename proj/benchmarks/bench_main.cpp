#include <benchmark/benchmark.h>

#include <fstream>
#include <random>

#include "tiledeform/spectrum.hpp"

using namespace tiledeform;

namespace {

json doc(const std::string& name) {
  std::ifstream in(std::string(TILEDEFORM_FIXTURE_DIR) + "/" + name + ".json");
  return json::parse(in);
}

const char* const kRules[] = {"fibonacci", "thue_morse", "chair"};

void BM_Smith(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<long> pick(-9, 9);
  ZMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) m(i, j) = pick(rng);
  for (auto _ : state) benchmark::DoNotOptimize(smith_normal_form(m));
}
BENCHMARK(BM_Smith)->Arg(8)->Arg(16)->Arg(32);

void BM_ChairBoundarySmith(benchmark::State& state) {
  const auto g = build_gamma(parse_substitution(doc("chair")), 1);
  for (auto _ : state) benchmark::DoNotOptimize(smith_normal_form(g.boundary[2]));
}
BENCHMARK(BM_ChairBoundarySmith)->Unit(benchmark::kMillisecond);

void BM_BuildSystem(benchmark::State& state) {
  const auto rule = parse_substitution(doc(kRules[state.range(0)]));
  state.SetLabel(kRules[state.range(0)]);
  for (auto _ : state) benchmark::DoNotOptimize(build_system(rule));
}
BENCHMARK(BM_BuildSystem)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_Cohomology(benchmark::State& state) {
  const auto g = build_gamma(parse_substitution(doc(kRules[state.range(0)])), 1);
  state.SetLabel(kRules[state.range(0)]);
  for (auto _ : state) benchmark::DoNotOptimize(cohomology(g, 1));
}
BENCHMARK(BM_Cohomology)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

void BM_EigenPenrose(benchmark::State& state) {
  const auto s = load_system(doc("penrose_gamma1"));
  for (auto _ : state) benchmark::DoNotOptimize(eigen_structure(s.sigma_star, s.stretch, 2));
}
BENCHMARK(BM_EigenPenrose)->Unit(benchmark::kMillisecond);

void BM_ClassifyFibonacci(benchmark::State& state) {
  const auto s = load_system(doc("fibonacci"));
  const auto f = natural_shape(s);
  const auto g = parse_shape(json{{"level", 0}, {"values", {{"a", "3/2"}, {"b", "1"}}}}, s);
  for (auto _ : state) benchmark::DoNotOptimize(classify_pair(f, g, s));
}
BENCHMARK(BM_ClassifyFibonacci);

void BM_RecurrenceSearch(benchmark::State& state) {
  const auto s = load_system(doc(state.range(1) ? "thue_morse" : "fibonacci"));
  state.SetLabel(state.range(1) ? "thue_morse" : "fibonacci");
  for (auto _ : state) benchmark::DoNotOptimize(find_recurrences(s, static_cast<std::size_t>(state.range(0))));
}
BENCHMARK(BM_RecurrenceSearch)->ArgsProduct({{400, 4000}, {0, 1}})->Unit(benchmark::kMillisecond);

void BM_SaturatedLattice(benchmark::State& state) {
  const auto s = load_system(doc("thue_morse"));
  for (auto _ : state) benchmark::DoNotOptimize(saturated_lattice(s));
}
BENCHMARK(BM_SaturatedLattice)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
