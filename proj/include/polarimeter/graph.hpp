#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace polarimeter {

using VertexId = std::uint32_t;
using ColorId = std::uint32_t;

struct Edge {
  VertexId src = 0;
  VertexId dst = 0;
  double weight = 1.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

/// Directed, weighted graph with one color per vertex.
///
/// The adjacency structure is immutable and shared between copies, so
/// recoloring (label shuffles, color swaps) never copies edges. Out- and
/// in-adjacency are both kept in CSR form, neighbors sorted by index.
class ColoredGraph {
 public:
  ColoredGraph() = default;

  /// Merges duplicate (src, dst) pairs by summing weights. Rejects
  /// self-loops, out-of-range endpoints and non-positive or non-finite
  /// weights. Vertex names default to the decimal index.
  static ColoredGraph from_edges(std::size_t vertex_count, std::vector<Edge> edges,
                                 std::vector<std::string> vertex_names = {});

  /// Same structure, new coloring. Color ids must be dense in
  /// [0, color_names.size()).
  [[nodiscard]] ColoredGraph recolored(std::vector<ColorId> colors,
                                       std::vector<std::string> color_names) const;
  [[nodiscard]] ColoredGraph recolored(std::vector<ColorId> colors) const;

  std::size_t vertex_count() const;
  std::size_t edge_count() const;

  std::span<const VertexId> out_neighbors(VertexId v) const;
  std::span<const double> out_weights(VertexId v) const;
  std::span<const VertexId> in_neighbors(VertexId v) const;
  std::span<const double> in_weights(VertexId v) const;
  double out_strength(VertexId v) const;
  std::size_t in_degree(VertexId v) const { return in_neighbors(v).size(); }
  std::size_t out_degree(VertexId v) const { return out_neighbors(v).size(); }
  bool has_edge(VertexId src, VertexId dst) const;

  /// All edges ordered by (src, dst).
  std::vector<Edge> edges() const;

  bool has_colors() const { return !colors_.empty(); }
  ColorId color(VertexId v) const { return colors_[v]; }
  std::span<const ColorId> colors() const { return colors_; }
  std::size_t color_count() const { return color_names_.size(); }
  const std::vector<std::string>& color_names() const { return color_names_; }
  const std::vector<std::string>& vertex_names() const;

  /// Identity of the adjacency structure (shared across recolorings).
  const void* structure_id() const { return structure_.get(); }

 private:
  struct Structure;
  std::shared_ptr<const Structure> structure_;
  std::vector<ColorId> colors_;
  std::vector<std::string> color_names_;
};

struct Partition {
  std::vector<std::size_t> color_sizes;

  std::size_t size_r() const { return color_sizes.at(0); }
  std::size_t size_b() const { return color_sizes.at(1); }
};

Partition partition(const ColoredGraph& graph);

struct ValidationReport {
  bool weakly_connected = false;
  std::size_t component_count = 0;
  std::vector<std::size_t> color_sizes;
  double density = 0.0;
  std::vector<std::string> warnings;
};

/// Checks colors and connectivity. Under `require_weak_connectivity` a
/// disconnected graph throws InputError; otherwise it only adds a warning.
ValidationReport validate(const ColoredGraph& graph, bool require_weak_connectivity);

/// Throws InputError unless the graph is colored with exactly two colors,
/// both non-empty.
void require_two_colors(const ColoredGraph& graph, const char* what);

/// Component id per vertex, ids numbered by smallest member index.
std::vector<std::uint32_t> weak_components(const ColoredGraph& graph);

bool is_weakly_connected(const ColoredGraph& graph);

/// Induced subgraph, re-indexed in increasing original index order.
/// Colors that disappear are dropped and the rest renumbered in order.
ColoredGraph induced_subgraph(const ColoredGraph& graph, std::span<const VertexId> vertices);

/// Largest weakly connected component; ties go to the component holding the
/// smallest original vertex index.
ColoredGraph largest_weak_component(const ColoredGraph& graph);

/// Undirected simple view: neighbor sets of the symmetrized graph with
/// weight (w_uv + w_vu) / 2. Used by the measures defined on undirected
/// structure.
struct UndirectedSkeleton {
  std::vector<std::size_t> offsets;
  std::vector<VertexId> neighbors;
  std::vector<double> weights;

  std::size_t vertex_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
  std::size_t degree(VertexId v) const { return offsets[v + 1] - offsets[v]; }
  std::span<const VertexId> neighbors_of(VertexId v) const {
    return {neighbors.data() + offsets[v], degree(v)};
  }
  std::span<const double> weights_of(VertexId v) const {
    return {weights.data() + offsets[v], degree(v)};
  }
  std::size_t edge_count() const { return neighbors.size() / 2; }
};

UndirectedSkeleton undirected_skeleton(const ColoredGraph& graph);

// ---- file formats --------------------------------------------------------
// Edge list: `src<TAB>dst[<TAB>weight]`, label file: `vertex<TAB>color`.
// `#` comment lines and blank lines are skipped.

ColoredGraph read_edge_list(std::istream& in, bool directed, const std::string& source_name = "<stream>");
ColoredGraph load_edge_list(const std::filesystem::path& path, bool directed);

ColoredGraph read_labels(const ColoredGraph& graph, std::istream& in,
                         const std::string& source_name = "<stream>");
ColoredGraph load_labels(const ColoredGraph& graph, const std::filesystem::path& path);

void write_edge_list(const ColoredGraph& graph, std::ostream& out);
void write_labels(const ColoredGraph& graph, std::ostream& out);
void save_edge_list(const ColoredGraph& graph, const std::filesystem::path& path);
void save_labels(const ColoredGraph& graph, const std::filesystem::path& path);

/// Loads an edge list and its label file in one go.
ColoredGraph load_colored_graph(const std::filesystem::path& edges, const std::filesystem::path& labels,
                                bool directed = true);

/// 64-bit FNV-1a over vertex count, edges and weight bits (colors excluded).
std::uint64_t structure_hash(const ColoredGraph& graph);

}  // namespace polarimeter
