#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "tiledeform/json_io.hpp"

namespace tiledeform::cli {

inline constexpr const char* kSchemaVersion = "tiledeform/1";

enum ExitCode { kOk = 0, kInternal = 1, kInvalid = 2, kIncomplete = 3 };

struct Request {
  std::string command;  // validate | complex | cohomology | classify | spectrum | render | schema
  std::string rule;     // substitution document path
  std::string fixture;  // complex fixture path
  std::optional<int> level;
  std::string f;  // empty means nat
  std::string g;
  int k_max = 6;
  int m_max = 40;
  std::size_t budget = 200'000;
  bool strict = false;
  bool timing = false;
  std::string out;    // report path, stdout when empty
  std::string svg;    // render output path
  std::string style;  // style document path
  std::string schema;  // schema name for the schema command
};

struct Flag {
  std::string kind;  // possibly-incomplete | needs-deeper-level | unit?
  std::string detail;
};

const std::vector<std::string>& flag_kinds();

struct Outcome {
  json report;
  int exit_code = kOk;
  std::string svg;
};

/// Runs one request. Validation problems come back as a report with exit
/// code 2 rather than as exceptions.
Outcome execute(const Request& request);

/// Machine-readable schema for substitution, shape, fixture, report or
/// style documents. Throws std::invalid_argument on other names.
json emit_schema(const std::string& name);

/// Canonical text of a document: sorted keys, two-space indent, newline.
std::string dump(const json& document);

/// Full command line entry point; writes the report and returns the exit code.
int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace tiledeform::cli
