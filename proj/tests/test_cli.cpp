#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <set>
#include <sstream>

#include "../tools/cli.hpp"
#include "support.hpp"

using namespace tiledeform;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& name) { return std::string(TILEDEFORM_FIXTURE_DIR) + "/" + name + ".json"; }

struct Run {
  int code = -1;
  std::string out;
};

// the installed binary, stderr discarded
Run run(const std::string& args) {
  Run r;
  const std::string cmd = std::string(TILEDEFORM_CLI_PATH) + " " + args + " 2>/dev/null";
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

cli::Request request(const std::string& command) {
  cli::Request r;
  r.command = command;
  return r;
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("Fibonacci natural against unit lengths") {
    const auto r = run("classify --rule " + fixture("fibonacci") + " --f nat --g lengths:1,1");
    CHECK(r.code == 0);
    const json doc = json::parse(r.out);
    CHECK(doc["schema"] == cli::kSchemaVersion);
    CHECK(doc["command"] == "classify");
    CHECK(doc["results"]["relation"] == "conjugate-up-to-linear");
    CHECK(doc["flags"].empty());
  }

  TEST_CASE("Thue-Morse cohomology report") {
    auto req = request("cohomology");
    req.rule = fixture("thue_morse");
    req.level = 1;
    const auto o = cli::execute(req);
    CHECK(o.exit_code == cli::kOk);
    const json& res = o.report["results"];
    CHECK(res["rank"] == 3);
    CHECK(res["eigen"]["characteristic_polynomial"] == "x^3 - x^2 - 2x");
    CHECK(res["eigen"]["zero_multiplicity"] == 1);
    std::set<std::string> roots;
    for (const auto& root : res["eigen"]["roots"]) roots.insert(root["exact"]["a"].get<std::string>());
    CHECK(roots == std::set<std::string>{"2", "-1"});
  }

  TEST_CASE("exit codes") {
    CHECK(run("cohomology --rule /nonexistent/rule.json").code == cli::kInvalid);
    CHECK(run("frobnicate --rule " + fixture("fibonacci")).code == cli::kInvalid);
    CHECK(run("cohomology").code == cli::kInvalid);
    CHECK(run("cohomology --rule " + fixture("fibonacci") + " --fixture " + fixture("circle")).code == cli::kInvalid);
    CHECK(run("classify --rule " + fixture("fibonacci") + " --f nat").code == cli::kInvalid);
    CHECK(run("cohomology --fixture " + std::string(TILEDEFORM_TEST_DATA_DIR) + "/bad_boundary.json").code ==
          cli::kInvalid);
    CHECK(run("cohomology --rule " + fixture("fibonacci") + " --level x").code == cli::kInvalid);
    // a starved recurrence search is flagged; --strict turns the flag into exit 3
    const std::string starved = "spectrum --rule " + fixture("fibonacci") + " --budget 100";
    const auto lax = run(starved);
    CHECK(lax.code == cli::kOk);
    CHECK(json::parse(lax.out)["flags"][0]["kind"] == "possibly-incomplete");
    CHECK(run(starved + " --strict").code == cli::kIncomplete);
    CHECK(run("spectrum --rule " + fixture("fibonacci") + " --strict").code == cli::kOk);
  }

  TEST_CASE("malformed documents name the location") {
    const fs::path tmp = fs::temp_directory_path() / "tiledeform_cli_bad.json";
    json doc = testing::fixture_doc("fibonacci");
    doc["prototiles"][0].erase("length");
    std::ofstream(tmp) << doc.dump();
    auto req = request("validate");
    req.rule = tmp.string();
    const auto o = cli::execute(req);
    CHECK(o.exit_code == cli::kInvalid);
    CHECK(o.report["error"]["where"].get<std::string>().find("prototiles") != std::string::npos);
    fs::remove(tmp);
  }

  TEST_CASE("schemas") {
    const json sub = cli::emit_schema("substitution");
    for (const char* key : {"name", "dimension", "stretch", "prototiles", "rule", "aperiodic_assertion"})
      CHECK(sub["properties"].contains(key));
    CHECK(sub["$id"] == std::string(cli::kSchemaVersion) + "/substitution");
    const json rep = cli::emit_schema("report");
    const std::string text = rep.dump();
    for (const auto& kind : cli::flag_kinds()) CHECK(text.find("\"" + kind + "\"") != std::string::npos);
    for (const char* name : {"shape", "fixture", "style"}) CHECK(cli::emit_schema(name).contains("$id"));
    CHECK_THROWS_AS(cli::emit_schema("unknown"), std::invalid_argument);

    const auto printed = run("schema substitution");
    CHECK(printed.code == 0);
    CHECK(json::parse(printed.out) == sub);
    CHECK(run("schema unknown").code == cli::kInvalid);
  }

  TEST_CASE("reports are byte-deterministic") {
    for (const std::string args :
         {"cohomology --rule " + fixture("chair"), "spectrum --rule " + fixture("thue_morse"),
          "classify --fixture " + fixture("penrose_gamma1") + " --f nat --g nat",
          "render --rule " + fixture("chair") + " --f nat"}) {
      CAPTURE(args);
      const auto a = run(args), b = run(args);
      CHECK(a.code == 0);
      CHECK(a.out == b.out);
      CHECK(a.out.back() == '\n');
    }
  }

  TEST_CASE("render writes an SVG") {
    const fs::path svg = fs::temp_directory_path() / "tiledeform_cli_render.svg";
    const auto r = run("render --rule " + fixture("chair") + " --f nat --svg " + svg.string());
    CHECK(r.code == 0);
    std::ifstream in(svg);
    std::stringstream text;
    text << in.rdbuf();
    CHECK(text.str().find("<svg") != std::string::npos);
    CHECK(json::parse(r.out)["results"]["svg_bytes"] == text.str().size());
    fs::remove(svg);
  }

  TEST_CASE("every shipped fixture round-trips") {
    std::size_t seen = 0;
    for (const auto& entry : fs::directory_iterator(TILEDEFORM_FIXTURE_DIR)) {
      if (entry.path().extension() != ".json") continue;
      CAPTURE(entry.path().string());
      std::ifstream in(entry.path());
      const json doc = json::parse(in);
      if (doc.contains("rule")) {
        const json once = substitution_to_json(parse_substitution(doc));
        CHECK(substitution_to_json(parse_substitution(once)) == once);
      } else {
        const json once = fixture_to_json(load_complex_fixture(doc));
        CHECK(fixture_to_json(load_complex_fixture(once)) == once);
      }
      // and the CLI accepts it
      const std::string flag = doc.contains("rule") ? "--rule " : "--fixture ";
      CHECK(run("validate " + flag + entry.path().string()).code == 0);
      ++seen;
    }
    CHECK(seen >= 6);
  }
}
