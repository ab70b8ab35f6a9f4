#include "polarimeter/graph.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string_view>
#include <unordered_map>

#include "polarimeter/error.hpp"

namespace polarimeter {

struct ColoredGraph::Structure {
  std::size_t n = 0;
  std::vector<std::size_t> out_offsets;
  std::vector<VertexId> out_targets;
  std::vector<double> out_weights;
  std::vector<std::size_t> in_offsets;
  std::vector<VertexId> in_sources;
  std::vector<double> in_weights;
  std::vector<double> out_strength;
  std::vector<std::string> names;
};

namespace {

std::vector<std::string> default_names(std::size_t n) {
  std::vector<std::string> names(n);
  for (std::size_t i = 0; i < n; ++i) names[i] = std::to_string(i);
  return names;
}

std::string format_weight(double w) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, w);
  return std::string(buf, res.ptr);
}

}  // namespace

ColoredGraph ColoredGraph::from_edges(std::size_t vertex_count, std::vector<Edge> edges,
                                      std::vector<std::string> vertex_names) {
  if (vertex_count == 0) throw InputError("graph must have at least one vertex");
  if (vertex_count > std::numeric_limits<VertexId>::max()) throw InputError("too many vertices");
  if (!vertex_names.empty() && vertex_names.size() != vertex_count)
    throw InputError("vertex name count does not match vertex count");

  for (const Edge& e : edges) {
    if (e.src >= vertex_count || e.dst >= vertex_count)
      throw InputError("edge endpoint out of range: " + std::to_string(e.src) + " -> " + std::to_string(e.dst));
    if (e.src == e.dst) throw InputError("self-loop at vertex " + std::to_string(e.src));
    if (!(e.weight > 0.0) || !std::isfinite(e.weight))
      throw InputError("edge weight must be positive and finite");
  }

  std::sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) {
    return a.src != b.src ? a.src < b.src : a.dst < b.dst;
  });
  std::size_t w = 0;
  for (std::size_t r = 0; r < edges.size(); ++r) {
    if (w > 0 && edges[w - 1].src == edges[r].src && edges[w - 1].dst == edges[r].dst) {
      edges[w - 1].weight += edges[r].weight;
    } else {
      edges[w++] = edges[r];
    }
  }
  edges.resize(w);

  auto s = std::make_shared<Structure>();
  const std::size_t n = vertex_count;
  const std::size_t m = edges.size();
  s->n = n;
  s->names = vertex_names.empty() ? default_names(n) : std::move(vertex_names);

  s->out_offsets.assign(n + 1, 0);
  s->in_offsets.assign(n + 1, 0);
  for (const Edge& e : edges) {
    ++s->out_offsets[e.src + 1];
    ++s->in_offsets[e.dst + 1];
  }
  std::partial_sum(s->out_offsets.begin(), s->out_offsets.end(), s->out_offsets.begin());
  std::partial_sum(s->in_offsets.begin(), s->in_offsets.end(), s->in_offsets.begin());

  s->out_targets.resize(m);
  s->out_weights.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    s->out_targets[i] = edges[i].dst;
    s->out_weights[i] = edges[i].weight;
  }
  {
    // Edges are sorted by source, so in-lists come out sorted by source too.
    std::vector<std::size_t> cursor(s->in_offsets.begin(), s->in_offsets.end() - 1);
    s->in_sources.resize(m);
    s->in_weights.resize(m);
    for (const Edge& e : edges) {
      const std::size_t at = cursor[e.dst]++;
      s->in_sources[at] = e.src;
      s->in_weights[at] = e.weight;
    }
  }
  edges.clear();
  edges.shrink_to_fit();

  s->out_strength.assign(n, 0.0);
  for (std::size_t v = 0; v < n; ++v) {
    double total = 0.0;
    for (std::size_t i = s->out_offsets[v]; i < s->out_offsets[v + 1]; ++i) total += s->out_weights[i];
    s->out_strength[v] = total;
  }

  ColoredGraph g;
  g.structure_ = std::move(s);
  return g;
}

ColoredGraph ColoredGraph::recolored(std::vector<ColorId> colors, std::vector<std::string> color_names) const {
  if (!structure_) throw InputError("recoloring an empty graph");
  if (colors.size() != structure_->n) throw InputError("color vector size does not match vertex count");
  for (ColorId c : colors)
    if (c >= color_names.size()) throw InputError("color id out of range");
  ColoredGraph g;
  g.structure_ = structure_;
  g.colors_ = std::move(colors);
  g.color_names_ = std::move(color_names);
  return g;
}

ColoredGraph ColoredGraph::recolored(std::vector<ColorId> colors) const {
  std::vector<std::string> names = color_names_;
  if (names.empty()) {
    ColorId top = 0;
    for (ColorId c : colors) top = std::max(top, c);
    names = {"red", "blue"};
    for (std::size_t c = names.size(); c <= top; ++c) names.push_back("c" + std::to_string(c));
  }
  return recolored(std::move(colors), std::move(names));
}

std::size_t ColoredGraph::vertex_count() const { return structure_ ? structure_->n : 0; }
std::size_t ColoredGraph::edge_count() const { return structure_ ? structure_->out_targets.size() : 0; }

std::span<const VertexId> ColoredGraph::out_neighbors(VertexId v) const {
  const auto& s = *structure_;
  return {s.out_targets.data() + s.out_offsets[v], s.out_offsets[v + 1] - s.out_offsets[v]};
}
std::span<const double> ColoredGraph::out_weights(VertexId v) const {
  const auto& s = *structure_;
  return {s.out_weights.data() + s.out_offsets[v], s.out_offsets[v + 1] - s.out_offsets[v]};
}
std::span<const VertexId> ColoredGraph::in_neighbors(VertexId v) const {
  const auto& s = *structure_;
  return {s.in_sources.data() + s.in_offsets[v], s.in_offsets[v + 1] - s.in_offsets[v]};
}
std::span<const double> ColoredGraph::in_weights(VertexId v) const {
  const auto& s = *structure_;
  return {s.in_weights.data() + s.in_offsets[v], s.in_offsets[v + 1] - s.in_offsets[v]};
}
double ColoredGraph::out_strength(VertexId v) const { return structure_->out_strength[v]; }

bool ColoredGraph::has_edge(VertexId src, VertexId dst) const {
  auto nb = out_neighbors(src);
  return std::binary_search(nb.begin(), nb.end(), dst);
}

std::vector<Edge> ColoredGraph::edges() const {
  std::vector<Edge> out;
  out.reserve(edge_count());
  for (VertexId v = 0; v < vertex_count(); ++v) {
    auto nb = out_neighbors(v);
    auto wt = out_weights(v);
    for (std::size_t i = 0; i < nb.size(); ++i) out.push_back({v, nb[i], wt[i]});
  }
  return out;
}

const std::vector<std::string>& ColoredGraph::vertex_names() const {
  static const std::vector<std::string> empty;
  return structure_ ? structure_->names : empty;
}

Partition partition(const ColoredGraph& graph) {
  if (!graph.has_colors()) throw InputError("graph has no colors");
  Partition p;
  p.color_sizes.assign(graph.color_count(), 0);
  for (ColorId c : graph.colors()) ++p.color_sizes[c];
  return p;
}

void require_two_colors(const ColoredGraph& graph, const char* what) {
  if (!graph.has_colors()) throw InputError(std::string(what) + ": graph has no colors");
  if (graph.color_count() != 2)
    throw InputError(std::string(what) + ": requires exactly 2 colors, got " + std::to_string(graph.color_count()));
  const Partition p = partition(graph);
  if (p.size_r() == 0 || p.size_b() == 0) throw InputError(std::string(what) + ": a color class is empty");
}

std::vector<std::uint32_t> weak_components(const ColoredGraph& graph) {
  const std::size_t n = graph.vertex_count();
  constexpr auto unset = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> comp(n, unset);
  std::vector<VertexId> stack;
  std::uint32_t next = 0;
  for (VertexId root = 0; root < n; ++root) {
    if (comp[root] != unset) continue;
    comp[root] = next;
    stack.push_back(root);
    while (!stack.empty()) {
      const VertexId u = stack.back();
      stack.pop_back();
      for (auto nbrs : {graph.out_neighbors(u), graph.in_neighbors(u)}) {
        for (VertexId w : nbrs) {
          if (comp[w] == unset) {
            comp[w] = next;
            stack.push_back(w);
          }
        }
      }
    }
    ++next;
  }
  return comp;
}

bool is_weakly_connected(const ColoredGraph& graph) {
  const auto comp = weak_components(graph);
  return std::all_of(comp.begin(), comp.end(), [](std::uint32_t c) { return c == 0; });
}

ValidationReport validate(const ColoredGraph& graph, bool require_weak_connectivity) {
  if (!graph.has_colors()) throw InputError("validate: graph has no colors");
  ValidationReport report;
  const auto comp = weak_components(graph);
  report.component_count = comp.empty() ? 0 : *std::max_element(comp.begin(), comp.end()) + 1;
  report.weakly_connected = report.component_count == 1;
  report.color_sizes = partition(graph).color_sizes;
  const double n = static_cast<double>(graph.vertex_count());
  report.density = n > 1 ? static_cast<double>(graph.edge_count()) / (n * (n - 1)) : 0.0;

  if (!report.weakly_connected) {
    const std::string msg =
        "graph is not weakly connected (" + std::to_string(report.component_count) + " components)";
    if (require_weak_connectivity) throw InputError(msg);
    report.warnings.push_back(msg);
  }
  for (std::size_t c = 0; c < report.color_sizes.size(); ++c) {
    if (report.color_sizes[c] == 0) report.warnings.push_back("color '" + graph.color_names()[c] + "' is empty");
  }
  if (report.color_sizes.size() < 2) report.warnings.push_back("fewer than 2 colors");
  return report;
}

ColoredGraph induced_subgraph(const ColoredGraph& graph, std::span<const VertexId> vertices) {
  const std::size_t n = graph.vertex_count();
  constexpr auto absent = std::numeric_limits<VertexId>::max();
  std::vector<VertexId> keep(vertices.begin(), vertices.end());
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  if (keep.empty()) throw InputError("induced subgraph of an empty vertex set");

  std::vector<VertexId> remap(n, absent);
  for (std::size_t i = 0; i < keep.size(); ++i) remap[keep[i]] = static_cast<VertexId>(i);

  std::vector<Edge> edges;
  std::vector<std::string> names;
  names.reserve(keep.size());
  for (VertexId v : keep) {
    names.push_back(graph.vertex_names()[v]);
    auto nb = graph.out_neighbors(v);
    auto wt = graph.out_weights(v);
    for (std::size_t i = 0; i < nb.size(); ++i)
      if (remap[nb[i]] != absent) edges.push_back({remap[v], remap[nb[i]], wt[i]});
  }
  ColoredGraph sub = ColoredGraph::from_edges(keep.size(), std::move(edges), std::move(names));
  if (!graph.has_colors()) return sub;

  std::vector<ColorId> color_remap(graph.color_count(), absent);
  std::vector<bool> present(graph.color_count(), false);
  for (VertexId v : keep) present[graph.color(v)] = true;
  std::vector<std::string> color_names;
  for (ColorId c = 0; c < graph.color_count(); ++c) {
    if (present[c]) {
      color_remap[c] = static_cast<ColorId>(color_names.size());
      color_names.push_back(graph.color_names()[c]);
    }
  }
  std::vector<ColorId> colors;
  colors.reserve(keep.size());
  for (VertexId v : keep) colors.push_back(color_remap[graph.color(v)]);
  return sub.recolored(std::move(colors), std::move(color_names));
}

ColoredGraph largest_weak_component(const ColoredGraph& graph) {
  const auto comp = weak_components(graph);
  if (comp.empty()) return graph;
  const std::uint32_t count = *std::max_element(comp.begin(), comp.end()) + 1;
  if (count == 1) return graph;
  std::vector<std::size_t> sizes(count, 0);
  for (auto c : comp) ++sizes[c];
  // Component ids follow smallest member index, so the first maximum wins ties.
  const auto best = static_cast<std::uint32_t>(std::max_element(sizes.begin(), sizes.end()) - sizes.begin());
  std::vector<VertexId> members;
  members.reserve(sizes[best]);
  for (VertexId v = 0; v < comp.size(); ++v)
    if (comp[v] == best) members.push_back(v);
  return induced_subgraph(graph, members);
}

UndirectedSkeleton undirected_skeleton(const ColoredGraph& graph) {
  const std::size_t n = graph.vertex_count();
  UndirectedSkeleton sk;
  sk.offsets.assign(n + 1, 0);
  sk.neighbors.reserve(graph.edge_count());
  sk.weights.reserve(graph.edge_count());
  for (VertexId v = 0; v < n; ++v) {
    auto on = graph.out_neighbors(v);
    auto ow = graph.out_weights(v);
    auto in = graph.in_neighbors(v);
    auto iw = graph.in_weights(v);
    std::size_t i = 0, j = 0;
    while (i < on.size() || j < in.size()) {
      if (j == in.size() || (i < on.size() && on[i] < in[j])) {
        sk.neighbors.push_back(on[i]);
        sk.weights.push_back(ow[i] / 2.0);
        ++i;
      } else if (i == on.size() || in[j] < on[i]) {
        sk.neighbors.push_back(in[j]);
        sk.weights.push_back(iw[j] / 2.0);
        ++j;
      } else {
        sk.neighbors.push_back(on[i]);
        sk.weights.push_back((ow[i] + iw[j]) / 2.0);
        ++i;
        ++j;
      }
    }
    sk.offsets[v + 1] = sk.neighbors.size();
  }
  return sk;
}

// ---- file formats --------------------------------------------------------

namespace {

std::vector<std::string_view> split_tabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

bool skip_line(std::string_view line) {
  if (line.empty() || line.front() == '#') return true;
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::string where(const std::string& source, std::size_t line_no) {
  return source + ":" + std::to_string(line_no) + ": ";
}

template <typename Fn>
void for_each_line(std::istream& in, Fn&& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (skip_line(line)) continue;
    fn(std::string_view(line), line_no);
  }
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  return in;
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

}  // namespace

ColoredGraph read_edge_list(std::istream& in, bool directed, const std::string& source_name) {
  std::unordered_map<std::string, VertexId> index;
  std::vector<std::string> names;
  std::vector<Edge> edges;
  auto intern = [&](std::string_view name) {
    auto [it, inserted] = index.try_emplace(std::string(name), static_cast<VertexId>(names.size()));
    if (inserted) names.emplace_back(name);
    return it->second;
  };

  for_each_line(in, [&](std::string_view line, std::size_t line_no) {
    const auto fields = split_tabs(line);
    if (fields.size() < 2 || fields.size() > 3 || fields[0].empty() || fields[1].empty())
      throw InputError(where(source_name, line_no) + "malformed edge line");
    double weight = 1.0;
    if (fields.size() == 3) {
      const auto f = fields[2];
      auto res = std::from_chars(f.data(), f.data() + f.size(), weight);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size())
        throw InputError(where(source_name, line_no) + "malformed weight '" + std::string(f) + "'");
      if (!(weight > 0.0) || !std::isfinite(weight))
        throw InputError(where(source_name, line_no) + "weight must be positive and finite");
    }
    if (fields[0] == fields[1]) throw InputError(where(source_name, line_no) + "self-loop on '" + std::string(fields[0]) + "'");
    const VertexId a = intern(fields[0]);
    const VertexId b = intern(fields[1]);
    edges.push_back({a, b, weight});
    if (!directed) edges.push_back({b, a, weight});
  });
  if (names.empty()) throw InputError(source_name + ": no edges");
  const std::size_t n = names.size();
  return ColoredGraph::from_edges(n, std::move(edges), std::move(names));
}

ColoredGraph load_edge_list(const std::filesystem::path& path, bool directed) {
  auto in = open_input(path);
  return read_edge_list(in, directed, path.string());
}

ColoredGraph read_labels(const ColoredGraph& graph, std::istream& in, const std::string& source_name) {
  const auto& names = graph.vertex_names();
  std::unordered_map<std::string_view, VertexId> index;
  index.reserve(names.size());
  for (VertexId v = 0; v < names.size(); ++v) index.emplace(names[v], v);

  constexpr auto unset = std::numeric_limits<ColorId>::max();
  std::vector<ColorId> colors(graph.vertex_count(), unset);
  std::vector<std::string> color_names;
  std::unordered_map<std::string, ColorId> color_index;

  for_each_line(in, [&](std::string_view line, std::size_t line_no) {
    const auto fields = split_tabs(line);
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty())
      throw InputError(where(source_name, line_no) + "malformed label line");
    auto it = index.find(fields[0]);
    if (it == index.end()) throw InputError(where(source_name, line_no) + "unknown vertex '" + std::string(fields[0]) + "'");
    if (colors[it->second] != unset)
      throw InputError(where(source_name, line_no) + "duplicate label for '" + std::string(fields[0]) + "'");
    auto [cit, inserted] = color_index.try_emplace(std::string(fields[1]), static_cast<ColorId>(color_names.size()));
    if (inserted) color_names.emplace_back(fields[1]);
    colors[it->second] = cit->second;
  });

  for (VertexId v = 0; v < colors.size(); ++v)
    if (colors[v] == unset) throw InputError(source_name + ": missing label for vertex '" + names[v] + "'");
  return graph.recolored(std::move(colors), std::move(color_names));
}

ColoredGraph load_labels(const ColoredGraph& graph, const std::filesystem::path& path) {
  auto in = open_input(path);
  return read_labels(graph, in, path.string());
}

void write_edge_list(const ColoredGraph& graph, std::ostream& out) {
  const auto& names = graph.vertex_names();
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    auto nb = graph.out_neighbors(v);
    auto wt = graph.out_weights(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      out << names[v] << '\t' << names[nb[i]];
      if (wt[i] != 1.0) out << '\t' << format_weight(wt[i]);
      out << '\n';
    }
  }
}

void write_labels(const ColoredGraph& graph, std::ostream& out) {
  if (!graph.has_colors()) throw InputError("graph has no colors to write");
  const auto& names = graph.vertex_names();
  for (VertexId v = 0; v < graph.vertex_count(); ++v)
    out << names[v] << '\t' << graph.color_names()[graph.color(v)] << '\n';
}

void save_edge_list(const ColoredGraph& graph, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_edge_list(graph, out);
  if (!out) throw InputError("write failed: " + path.string());
}

void save_labels(const ColoredGraph& graph, const std::filesystem::path& path) {
  auto out = open_output(path);
  write_labels(graph, out);
  if (!out) throw InputError("write failed: " + path.string());
}

ColoredGraph load_colored_graph(const std::filesystem::path& edges, const std::filesystem::path& labels,
                                bool directed) {
  return load_labels(load_edge_list(edges, directed), labels);
}

std::uint64_t structure_hash(const ColoredGraph& graph) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      h ^= (word >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(graph.vertex_count());
  mix(graph.edge_count());
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    auto nb = graph.out_neighbors(v);
    auto wt = graph.out_weights(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      mix((static_cast<std::uint64_t>(v) << 32) | nb[i]);
      mix(std::bit_cast<std::uint64_t>(wt[i]));
    }
  }
  return h;
}

}  // namespace polarimeter
