#include <doctest.h>

#include "support.hpp"
#include "tiledeform/substitution.hpp"

using namespace tiledeform;

namespace {

json word_rule(const std::map<std::string, std::vector<std::string>>& rule, const json& lengths, const json& stretch) {
  json doc = {{"name", "test"}, {"dimension", 1}, {"stretch", stretch}, {"aperiodic_assertion", true}};
  doc["prototiles"] = json::array();
  for (const auto& [id, len] : lengths.items()) doc["prototiles"].push_back({{"id", id}, {"length", len}});
  doc["rule"] = rule;
  return doc;
}

std::string rewrite(const std::map<char, std::string>& rule, std::string w, int n) {
  for (int i = 0; i < n; ++i) {
    std::string next;
    for (char c : w) next += rule.at(c);
    w = next;
  }
  return w;
}

std::vector<std::vector<long>> matmul(const std::vector<std::vector<long>>& a, const std::vector<std::vector<long>>& b) {
  std::vector<std::vector<long>> c(a.size(), std::vector<long>(b[0].size(), 0));
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t k = 0; k < b.size(); ++k)
      for (std::size_t j = 0; j < b[0].size(); ++j) c[i][j] += a[i][k] * b[k][j];
  return c;
}

}  // namespace

TEST_SUITE("substitution") {
  TEST_CASE("Fibonacci document") {
    const auto rule = parse_substitution(testing::fixture_doc("fibonacci"));
    CHECK(rule.size() == 2);
    CHECK(rule.matrix == std::vector<std::vector<long>>{{1, 1}, {1, 0}});
    CHECK(validate_rule(rule).valid);
    const auto p = is_primitive(rule);
    CHECK(p.status == PrimitivityStatus::primitive);
    CHECK(p.power == 2);
  }

  TEST_CASE("Thue-Morse matrix and primitivity") {
    const auto rule = parse_substitution(testing::fixture_doc("thue_morse"));
    CHECK(substitution_matrix(rule) == std::vector<std::vector<long>>{{1, 1}, {1, 1}});
    const auto p = is_primitive(rule);
    CHECK(p.status == PrimitivityStatus::primitive);
    CHECK(p.power == 1);
  }

  TEST_CASE("schema violations name the offending key") {
    json doc = testing::fixture_doc("fibonacci");
    doc["prototiles"] = json::array();
    CHECK_THROWS_AS(parse_substitution(doc), SchemaError);

    doc = testing::fixture_doc("fibonacci");
    doc["stretch"] = {{"a", "1/2"}, {"b", "1/2"}, {"D", 20}};
    CHECK_THROWS_AS(parse_substitution(doc), SchemaError);

    doc = testing::fixture_doc("fibonacci");
    doc["rule"]["a"] = {"a", "c"};
    try {
      parse_substitution(doc);
      FAIL("unknown prototile accepted");
    } catch (const SchemaError& e) {
      CHECK(e.where().find("rule") != std::string::npos);
    }

    doc = testing::fixture_doc("fibonacci");
    doc.erase("aperiodic_assertion");
    CHECK_THROWS_AS(parse_substitution(doc), SchemaError);
  }

  TEST_CASE("length mismatch is reported") {
    const auto rule = parse_substitution(word_rule({{"a", {"b"}}, {"b", {"a"}}}, {{"a", 1}, {"b", 1}}, 2));
    const auto v = validate_rule(rule);
    CHECK_FALSE(v.valid);
    bool mismatch = false;
    for (const auto& t : v.tiles) mismatch = mismatch || t.status == "length-mismatch";
    CHECK(mismatch);
  }

  TEST_CASE("non-primitive rule carries a stable zero pattern") {
    const auto rule = parse_substitution(word_rule({{"a", {"a", "b"}}, {"b", {"b"}}}, {{"a", 1}, {"b", 1}}, 2));
    const auto p = is_primitive(rule);
    CHECK(p.status == PrimitivityStatus::not_primitive);
    REQUIRE(p.stable_zero_pattern.size() == 2);
    CHECK_FALSE(p.stable_zero_pattern[0][1]);  // b never produces a
  }

  TEST_CASE("one-letter rules") {
    CHECK(parse_substitution(word_rule({{"a", {"a"}}}, {{"a", 1}}, 2)).matrix == std::vector<std::vector<long>>{{1}});
    const auto rule = parse_substitution(word_rule({{"a", {"a", "a"}}}, {{"a", 1}}, 2));
    CHECK(rule.matrix == std::vector<std::vector<long>>{{2}});
    CHECK(validate_rule(rule).valid);
    // aa has no copy strictly inside 2a; aaaa does
    const auto seed = seed_fixed_point(rule);
    REQUIRE(seed);
    CHECK(seed->power == 2);
  }

  TEST_CASE("chair document") {
    const auto rule = parse_substitution(testing::fixture_doc("chair"));
    CHECK(rule.size() == 4);
    for (const auto& img : rule.images) CHECK(img.size() == 4);
    for (std::size_t j = 0; j < 4; ++j) {
      long col = 0;
      for (std::size_t i = 0; i < 4; ++i) col += rule.matrix[i][j];
      CHECK(col == 4);
    }
    const auto v = validate_rule(rule);
    CHECK(v.valid);
    for (const auto& t : v.tiles) CHECK(t.status == "exact-cover");
    CHECK(iterate_patch(rule, 0, 2).size() == 16);
    const auto seed = seed_fixed_point(rule);
    REQUIRE(seed);
    CHECK(seed->power <= 3);
  }

  TEST_CASE("overlapping chair placement is caught") {
    json doc = testing::fixture_doc("chair");
    doc["rule"]["R0"][1]["offset"] = {0, 0};
    const auto v = validate_rule(parse_substitution(doc));
    CHECK_FALSE(v.valid);
  }

  TEST_CASE("iterated Fibonacci patches spell the rewritten word") {
    const auto rule = parse_substitution(testing::fixture_doc("fibonacci"));
    const std::map<char, std::string> sigma = {{'a', "ab"}, {'b', "a"}};
    for (int n = 0; n <= 8; ++n) {
      const Patch p = iterate_patch(rule, 0, n);
      const std::string w = rewrite(sigma, "a", n);
      REQUIRE(p.size() == w.size());
      Quad x;
      for (std::size_t i = 0; i < w.size(); ++i) {
        CHECK(rule.prototiles[p.placements[i].tile].id == std::string(1, w[i]));
        CHECK(p.placements[i].x == x);
        x += rule.prototiles[p.placements[i].tile].length;
      }
    }
    const auto seed = seed_fixed_point(rule);
    REQUIRE(seed);
    // aba touches both ends of tau^2 a; abaab has an a strictly inside
    CHECK(seed->tile == 0);
    CHECK(seed->power == 3);
  }

  TEST_CASE("substitution matrix of powers recounts placements") {
    for (const char* name : {"fibonacci", "thue_morse", "chair"}) {
      const auto rule = parse_substitution(testing::fixture_doc(name));
      auto mp = rule.matrix;
      for (int m = 1; m <= 4; ++m) {
        for (std::size_t j = 0; j < rule.size(); ++j) {
          std::vector<long> count(rule.size(), 0);
          for (const auto& pl : iterate_patch(rule, j, m).placements) ++count[pl.tile];
          for (std::size_t i = 0; i < rule.size(); ++i) CHECK(count[i] == mp[i][j]);
        }
        mp = matmul(mp, rule.matrix);
      }
    }
  }

  TEST_CASE("iterate is repeated substitute") {
    const auto rule = parse_substitution(testing::fixture_doc("chair"));
    Patch p = iterate_patch(rule, 1, 0);
    CHECK(p.size() == 1);
    for (int n = 1; n <= 3; ++n) {
      p = substitute(rule, p);
      const Patch q = iterate_patch(rule, 1, n);
      REQUIRE(p.size() == q.size());
      for (std::size_t i = 0; i < p.size(); ++i) {
        CHECK(p.placements[i].tile == q.placements[i].tile);
        CHECK(p.placements[i].x == q.placements[i].x);
        CHECK(p.placements[i].y == q.placements[i].y);
      }
    }
    CHECK_THROWS_AS(iterate_patch(rule, 0, 6, 1000), ResourceCapExceeded);
  }

  TEST_CASE("prototile boundaries close up") {
    const auto rule = parse_substitution(testing::fixture_doc("chair"));
    for (const auto& t : rule.prototiles) {
      Vec2i sum;
      for (const auto& e : t.boundary) sum = sum + e.dir;
      CHECK(sum == Vec2i{0, 0});
      CHECK(t.boundary.size() == 8);  // an L-tromino has perimeter 8
    }
  }

  TEST_CASE("documents round-trip") {
    for (const char* name : {"fibonacci", "thue_morse", "chair"}) {
      const auto rule = parse_substitution(testing::fixture_doc(name));
      const json once = substitution_to_json(rule);
      CHECK(substitution_to_json(parse_substitution(once)) == once);
      CHECK(parse_substitution(once).matrix == rule.matrix);
    }
  }
}
