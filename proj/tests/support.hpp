#pragma once

#include <fstream>
#include <map>
#include <random>
#include <string>

#include "tiledeform/system.hpp"

namespace testing {

using tiledeform::json;

inline json fixture_doc(const std::string& name) {
  std::ifstream in(std::string(TILEDEFORM_FIXTURE_DIR) + "/" + name + ".json");
  if (!in) throw std::runtime_error("missing fixture " + name);
  return json::parse(in);
}

#ifdef TILEDEFORM_TEST_DATA_DIR
inline json data_doc(const std::string& name) {
  std::ifstream in(std::string(TILEDEFORM_TEST_DATA_DIR) + "/" + name + ".json");
  if (!in) throw std::runtime_error("missing test data " + name);
  return json::parse(in);
}
#endif

// Systems are expensive to build; share one per fixture within a binary.
inline const tiledeform::TilingSystem& sys(const std::string& name) {
  static std::map<std::string, tiledeform::TilingSystem> cache;
  auto it = cache.find(name);
  if (it == cache.end()) it = cache.emplace(name, tiledeform::load_system(fixture_doc(name))).first;
  return it->second;
}

inline std::mt19937_64& rng() {
  static std::mt19937_64 g(20240611);
  return g;
}

inline long uniform(long lo, long hi) { return std::uniform_int_distribution<long>(lo, hi)(rng()); }

}  // namespace testing
