#include <stdexcept>

#include "cli.hpp"

namespace tiledeform::cli {

namespace {

json exact_value() {
  return {{"description", "integer, \"p/q\" string, or a + b sqrt(D)"},
          {"oneOf",
           {{{"type", "integer"}},
            {{"type", "string"}, {"pattern", "^-?[0-9]+(/[0-9]+)?$"}},
            {{"type", "object"},
             {"required", {"a", "b", "D"}},
             {"properties",
              {{"a", {{"type", "string"}}}, {"b", {{"type", "string"}}}, {"D", {{"type", "integer"}, {"minimum", 1}}}}}}}}};
}

json triples() {
  return {{"type", "array"},
          {"items", {{"type", "array"}, {"minItems", 3}, {"maxItems", 3}}},
          {"description", "[source cell, target cell, integer coefficient]"}};
}

json base(const std::string& name, const std::string& title) {
  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"$id", std::string(kSchemaVersion) + "/" + name},
          {"version", kSchemaVersion},
          {"title", title},
          {"type", "object"}};
}

json substitution() {
  json s = base("substitution", "substitution rule");
  s["required"] = {"name", "dimension", "stretch", "prototiles", "rule", "aperiodic_assertion"};
  json prototile = {{"type", "object"},
                    {"required", {"id"}},
                    {"properties",
                     {{"id", {{"type", "string"}}},
                      {"length", exact_value()},
                      {"cells", {{"type", "array"}, {"description", "unit squares [x, y] of a polyomino"}}}}}};
  json placement = {{"type", "object"},
                    {"required", {"tile", "offset"}},
                    {"properties", {{"tile", {{"type", "string"}}}, {"offset", {{"type", "array"}}}}}};
  s["properties"] = {
      {"name", {{"type", "string"}}},
      {"dimension", {{"enum", {1, 2}}}},
      {"stretch", exact_value()},
      {"mode", {{"enum", {"exact-self-similar", "amalgamation"}}}},
      {"prototiles", {{"type", "array"}, {"minItems", 1}, {"items", prototile}}},
      {"rule",
       {{"type", "object"},
        {"description", "prototile id -> image: list of ids (1-D) or placements (2-D)"},
        {"additionalProperties", {{"type", "array"}, {"items", {{"oneOf", {{{"type", "string"}}, placement}}}}}}}},
      {"aperiodic_assertion", {{"type", "boolean"}}}};
  return s;
}

json shape() {
  json s = base("shape", "shape parameter");
  s["required"] = {"level", "values"};
  s["properties"] = {
      {"level", {{"oneOf", {{{"type", "integer"}, {"minimum", 0}}, {{"const", "fixture"}}}}}},
      {"dimension", {{"type", "integer"}}},
      {"values",
       {{"type", "object"},
        {"description", "edge cell id -> value (1-D) or list of d values"},
        {"additionalProperties", {{"oneOf", {exact_value(), {{"type", "number"}}, {{"type", "array"}}}}}}}}};
  return s;
}

json fixture() {
  json s = base("fixture", "cell complex with a cellular self-map");
  s["required"] = {"dimension", "cells", "boundary", "chain_map"};
  s["properties"] = {
      {"name", {{"type", "string"}}},
      {"dimension", {{"enum", {1, 2, 3}}}},
      {"cells",
       {{"type", "object"},
        {"description", "\"0\", \"1\", ... -> list of cell ids"},
        {"additionalProperties", {{"type", "array"}, {"items", {{"type", "string"}}}}}}},
      {"boundary",
       {{"type", "object"},
        {"description", "degree -> triples [cell, face, coefficient]; degree-2 listing order is the walk order"},
        {"additionalProperties", triples()}}},
      {"chain_map", {{"type", "object"}, {"additionalProperties", triples()}}},
      {"stretch", exact_value()},
      {"geometry",
       {{"type", "object"},
        {"properties",
         {{"dimension", {{"type", "integer"}}},
          {"edges", {{"type", "object"}, {"description", "edge id -> list of d exact values"}}},
          {"frame", {{"type", "array"}, {"description", "d x d drawing frame, columns are basis vectors"}}}}}}},
      {"patch",
       {{"type", "object"},
        {"required", {"edges", "faces"}},
        {"properties",
         {{"edges", {{"type", "array"}, {"description", "[tail vertex, head vertex, edge cell]"}}},
          {"faces", {{"type", "array"}, {"description", "{prototile, boundary: counter-clockwise vertex ids}"}}},
          {"vertex_cells", {{"type", "object"}}}}}}}};
  return s;
}

json report() {
  json s = base("report", "analysis report");
  s["required"] = {"schema", "command", "request", "results", "flags"};
  s["properties"] = {
      {"schema", {{"const", kSchemaVersion}}},
      {"command", {{"enum", {"validate", "complex", "cohomology", "classify", "spectrum", "render", "schema"}}}},
      {"request", {{"type", "object"}}},
      {"results", {{"type", "object"}}},
      {"error", {{"type", "object"}, {"properties", {{"where", {{"type", "string"}}}, {"message", {{"type", "string"}}}}}}},
      {"flags",
       {{"type", "array"},
        {"items",
         {{"type", "object"},
          {"required", {"kind", "detail"}},
          {"properties", {{"kind", {{"enum", flag_kinds()}}}, {"detail", {{"type", "string"}}}}}}}}},
      {"notes", {{"type", "array"}, {"items", {{"type", "string"}}}}},
      {"timing", {{"type", "object"}, {"description", "present only with --timing"}}}};
  return s;
}

json style() {
  json s = base("style", "render style");
  s["properties"] = {{"fills", {{"type", "object"}, {"additionalProperties", {{"type", "string"}}}}},
                     {"stroke", {{"type", "string"}}},
                     {"stroke_width", {{"type", "number"}, {"minimum", 0}}},
                     {"width", {{"type", "number"}, {"minimum", 1}}},
                     {"height", {{"type", "number"}, {"minimum", 1}}},
                     {"margin", {{"type", "number"}, {"minimum", 0}}},
                     {"background", {{"type", "string"}}}};
  return s;
}

}  // namespace

const std::vector<std::string>& flag_kinds() {
  static const std::vector<std::string> kinds = {"possibly-incomplete", "needs-deeper-level", "unit?"};
  return kinds;
}

json emit_schema(const std::string& name) {
  if (name == "substitution") return substitution();
  if (name == "shape") return shape();
  if (name == "fixture") return fixture();
  if (name == "report") return report();
  if (name == "style") return style();
  throw std::invalid_argument("unknown schema '" + name + "'");
}

}  // namespace tiledeform::cli
