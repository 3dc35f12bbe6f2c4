#include "dpbf/partition.hpp"

#include <string>

#include "dpbf/error.hpp"

namespace dpbf {
namespace {

void CheckCoord(NodeCoord c) {
  if (c.level > 62 || c.index >= (std::uint64_t{1} << c.level)) {
    Fail(ErrorCode::kInvalidParameter,
         "invalid node coordinate (" + std::to_string(c.level) + ", " + std::to_string(c.index) + ")");
  }
}

}  // namespace

IdRange NamespaceOf(NodeCoord coord, std::uint64_t universe_size) {
  CheckCoord(coord);
  const std::uint64_t parts = std::uint64_t{1} << coord.level;
  if (universe_size == 0 || universe_size % parts != 0) {
    Fail(ErrorCode::kInvalidParameter, "universe size must be a positive multiple of 2^level");
  }
  const std::uint64_t width = universe_size / parts;
  return {coord.index * width, coord.index * width + width};
}

std::uint64_t LeafIndexOf(std::uint64_t element, std::uint32_t depth, std::uint64_t universe_size) {
  if (depth > 62) Fail(ErrorCode::kInvalidParameter, "depth must be <= 62");
  const std::uint64_t leaves = std::uint64_t{1} << depth;
  if (universe_size == 0 || universe_size % leaves != 0) {
    Fail(ErrorCode::kInvalidParameter, "universe size must be a positive multiple of 2^depth");
  }
  if (element >= universe_size) {
    Fail(ErrorCode::kOutOfUniverse,
         "id " + std::to_string(element) + " outside universe [0, " + std::to_string(universe_size) + ")");
  }
  // floor(e * 2^d / |U|) == floor(e / (|U| / 2^d)) because 2^d divides |U|.
  return element / (universe_size / leaves);
}

NodeCoord Parent(NodeCoord coord) {
  CheckCoord(coord);
  if (coord.level == 0) Fail(ErrorCode::kInvalidParameter, "the root has no parent");
  return {coord.level - 1, coord.index / 2};
}

std::pair<NodeCoord, NodeCoord> Children(NodeCoord coord, std::uint32_t depth) {
  CheckCoord(coord);
  if (coord.level >= depth) Fail(ErrorCode::kInvalidParameter, "leaf-level nodes have no children");
  return {{coord.level + 1, coord.index * 2}, {coord.level + 1, coord.index * 2 + 1}};
}

IdRange LeafSpan(NodeCoord coord, std::uint32_t depth) {
  CheckCoord(coord);
  if (coord.level > depth) Fail(ErrorCode::kInvalidParameter, "coordinate lies below the tree depth");
  const std::uint64_t width = std::uint64_t{1} << (depth - coord.level);
  return {coord.index * width, coord.index * width + width};
}

}  // namespace dpbf
