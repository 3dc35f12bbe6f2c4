#pragma once

#include <cstdint>
#include <utility>

namespace dpbf {

// Node (level, index) of the complete partition tree; root is (0, 0).
struct NodeCoord {
  std::uint32_t level = 0;
  std::uint64_t index = 0;

  friend bool operator==(const NodeCoord&, const NodeCoord&) = default;
  friend auto operator<=>(const NodeCoord&, const NodeCoord&) = default;
};

// Half-open id range [start, end).
struct IdRange {
  std::uint64_t start = 0;
  std::uint64_t end = 0;

  [[nodiscard]] bool contains(std::uint64_t id) const noexcept { return id >= start && id < end; }
  [[nodiscard]] std::uint64_t size() const noexcept { return end - start; }
  friend bool operator==(const IdRange&, const IdRange&) = default;
};

// Ids owned by coord: [j*|U|/2^i, (j+1)*|U|/2^i).
IdRange NamespaceOf(NodeCoord coord, std::uint64_t universe_size);

// The unique leaf j at depth d whose namespace holds element.
std::uint64_t LeafIndexOf(std::uint64_t element, std::uint32_t depth, std::uint64_t universe_size);

NodeCoord Parent(NodeCoord coord);
std::pair<NodeCoord, NodeCoord> Children(NodeCoord coord, std::uint32_t depth);

// Leaf indices under coord: [j*2^(d-i), (j+1)*2^(d-i)).
IdRange LeafSpan(NodeCoord coord, std::uint32_t depth);

}  // namespace dpbf
