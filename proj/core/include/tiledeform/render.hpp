#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tiledeform/deformation.hpp"

namespace tiledeform {

/// Oriented edge of a combinatorial patch: head - tail = f(cell).
struct PatchEdge {
  std::size_t tail = 0;
  std::size_t head = 0;
  std::size_t cell = 0;  // 1-cell of the shape's complex
};

struct PatchFace {
  std::string prototile;
  std::vector<std::size_t> boundary;  // vertex loop, counter-clockwise; two vertices in 1-D
};

/// Tiles glued along shared vertices, with every edge tagged by the complex
/// cell a shape parameter is evaluated on. Vertex 0 is the base vertex
/// (lexicographically least).
struct CombinatorialPatch {
  int level = 0;
  int dimension = 1;
  std::vector<std::string> vertex_ids;
  std::vector<long> vertex_cell;  // 0-cell of the shape's complex, -1 if unknown
  std::vector<PatchEdge> edges;
  std::vector<PatchFace> faces;
};

/// sigma^power of one prototile. level 0 works in any dimension; the
/// system's own level (1-D) keeps the tiles whose collar lies in the patch.
CombinatorialPatch rule_patch(const TilingSystem& s, std::size_t tile, int power, int level = 0);
/// The patch shipped with a complex fixture.
CombinatorialPatch fixture_patch(const TilingSystem& s);

struct GeometricRealization {
  int dimension = 1;
  std::vector<std::vector<Quad>> vertices;  // exact positions in shape coordinates
  std::vector<std::array<double, 2>> points;  // drawing coordinates (frame applied)
  std::vector<PatchFace> faces;
  std::size_t base = 0;
  bool closed = true;       // every edge agrees with the BFS positions
  double discrepancy = 0;   // largest edge mismatch
  bool admissible = true;
  std::vector<std::string> warnings;
};

/// Places the base vertex at the origin and every other vertex at f of a
/// path to it, breadth first in edge order.
GeometricRealization realize_patch(const CombinatorialPatch& patch, const ShapeParameter& f, const TilingSystem& s);

struct RenderStyle {
  std::map<std::string, std::string> fills;
  std::string stroke = "#202020";
  double stroke_width = 1.0;  // pixels
  double width = 800;
  double height = 600;
  double margin = 10;
  std::string background = "#ffffff";
};

RenderStyle parse_style(const json& document);
json style_to_json(const RenderStyle& style);

std::string render_svg(const GeometricRealization& realization, const RenderStyle& style = {});
std::string render_deformation_pair(const CombinatorialPatch& patch, const ShapeParameter& f, const ShapeParameter& g,
                                    const TilingSystem& s, const RenderStyle& style = {});

}  // namespace tiledeform
