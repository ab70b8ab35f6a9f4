#include "polarimeter/baselines.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <queue>

#include "polarimeter/dsp.hpp"
#include "polarimeter/error.hpp"
#include "polarimeter/evaluation.hpp"
#include "polarimeter/parallel.hpp"
#include "polarimeter/random.hpp"

namespace polarimeter {

namespace {

constexpr MeasureName kAllMeasures[] = {MeasureName::rwc, MeasureName::arwc, MeasureName::ei,  MeasureName::aei,
                                        MeasureName::q,   MeasureName::col_ass, MeasureName::bp, MeasureName::bcc,
                                        MeasureName::dm,  MeasureName::cca, MeasureName::dsp};

MeasureResult finish(MeasureName name, const ColoredGraph& graph, double raw, nlohmann::json params,
                     std::optional<std::uint64_t> seed = std::nullopt) {
  MeasureResult r;
  r.name = name;
  r.raw = raw;
  std::string warning;
  r.rescaled = rescale(raw, rescale_rule(name, graph.vertex_count()), &warning);
  if (!warning.empty()) params["rescale_warning"] = warning;
  r.params = std::move(params);
  r.seed = seed;
  return r;
}

nlohmann::json diffusion_json(const DiffusionParams& p) {
  return {{"alpha", p.alpha},
          {"tolerance", p.tolerance},
          {"max_iterations", p.max_iterations},
          {"dangling", to_string(p.dangling)}};
}

// Directed weight totals between color classes: w[x][y] sums edges x -> y.
std::vector<double> color_weight_matrix(const ColoredGraph& graph) {
  const std::size_t k = graph.color_count();
  std::vector<double> w(k * k, 0.0);
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    auto nb = graph.out_neighbors(v);
    auto wt = graph.out_weights(v);
    const ColorId cv = graph.color(v);
    for (std::size_t i = 0; i < nb.size(); ++i) w[cv * k + graph.color(nb[i])] += wt[i];
  }
  return w;
}

}  // namespace

std::string to_string(MeasureName name) {
  switch (name) {
    case MeasureName::rwc: return "rwc";
    case MeasureName::arwc: return "arwc";
    case MeasureName::ei: return "ei";
    case MeasureName::aei: return "aei";
    case MeasureName::q: return "q";
    case MeasureName::col_ass: return "col_ass";
    case MeasureName::bp: return "bp";
    case MeasureName::bcc: return "bcc";
    case MeasureName::dm: return "dm";
    case MeasureName::cca: return "cca";
    case MeasureName::dsp: return "dsp";
  }
  return "?";
}

MeasureName parse_measure_name(const std::string& text) {
  for (MeasureName m : kAllMeasures)
    if (text == to_string(m)) return m;
  throw InputError("unknown measure '" + text + "'");
}

const std::vector<MeasureName>& all_measures() {
  static const std::vector<MeasureName> all(std::begin(kAllMeasures), std::end(kAllMeasures));
  return all;
}

nlohmann::json to_json(const MeasureResult& r) {
  nlohmann::json j;
  j["measure"] = to_string(r.name);
  j["raw"] = r.raw;
  j["rescaled"] = r.rescaled;
  j["params"] = r.params;
  j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
  return j;
}

void InfluencerConfig::validate() const {
  if (mode == InfluencerCount::fixed && k < 1) throw InputError("influencer count must be at least 1");
  if (mode == InfluencerCount::fraction && !(fraction > 0.0 && fraction <= 0.5))
    throw InputError("influencer fraction must lie in (0, 0.5]");
}

std::size_t InfluencerConfig::count_for(std::size_t side_size) const {
  std::size_t want = k;
  if (mode == InfluencerCount::fraction)
    want = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(side_size) - 1e-9));
  return std::clamp<std::size_t>(want, 1, side_size);
}

nlohmann::json InfluencerConfig::to_json() const {
  nlohmann::json j;
  j["mode"] = mode == InfluencerCount::fixed ? "fixed" : "fraction";
  if (mode == InfluencerCount::fixed) j["k"] = k;
  else j["fraction"] = fraction;
  j["exclude_from_restart"] = exclude_from_restart;
  return j;
}

std::vector<VertexId> top_influencers(const ColoredGraph& graph, ColorId color, std::size_t k) {
  std::vector<VertexId> side;
  for (VertexId v = 0; v < graph.vertex_count(); ++v)
    if (graph.color(v) == color) side.push_back(v);
  k = std::min(k, side.size());
  std::partial_sort(side.begin(), side.begin() + static_cast<std::ptrdiff_t>(k), side.end(),
                    [&](VertexId a, VertexId b) {
                      const auto da = graph.in_degree(a), db = graph.in_degree(b);
                      return da != db ? da > db : a < b;
                    });
  side.resize(k);
  std::sort(side.begin(), side.end());
  return side;
}

// ---- random-walk controversy ----------------------------------------------

namespace {

struct WalkGraph {
  const ColoredGraph& graph;
  std::vector<double> cumulative;  // per out-edge slot, running weight within its vertex
  std::vector<std::size_t> offsets;
  bool unweighted = true;

  explicit WalkGraph(const ColoredGraph& g) : graph(g) {
    offsets.assign(g.vertex_count() + 1, 0);
    cumulative.reserve(g.edge_count());
    for (VertexId v = 0; v < g.vertex_count(); ++v) {
      double run = 0.0;
      for (double w : g.out_weights(v)) {
        if (w != 1.0) unweighted = false;
        run += w;
        cumulative.push_back(run);
      }
      offsets[v + 1] = cumulative.size();
    }
  }

  VertexId step(VertexId v, Rng& rng) const {
    auto nb = graph.out_neighbors(v);
    if (unweighted) return nb[rng.below(nb.size())];
    const double* first = cumulative.data() + offsets[v];
    const double* last = cumulative.data() + offsets[v + 1];
    const double target = rng.uniform() * last[-1];
    const auto pos = std::upper_bound(first, last, target) - first;
    return nb[std::min<std::size_t>(static_cast<std::size_t>(pos), nb.size() - 1)];
  }
};

MeasureResult random_walk_controversy(MeasureName name, const ColoredGraph& graph, const DiffusionParams& params,
                                      const InfluencerConfig& cfg, std::size_t walks, std::uint64_t seed) {
  require_two_colors(graph, to_string(name).c_str());
  params.validate();
  cfg.validate();
  if (walks == 0) throw InputError("walk count must be positive");
  const std::size_t n = graph.vertex_count();
  const Partition part = partition(graph);

  std::vector<char> is_influencer(n, 0);
  std::size_t influencer_count[2];
  for (ColorId c = 0; c < 2; ++c) {
    const auto top = top_influencers(graph, c, cfg.count_for(part.color_sizes[c]));
    influencer_count[c] = top.size();
    for (VertexId v : top) is_influencer[v] = 1;
  }

  std::vector<VertexId> restart[2];
  VertexId side_key[2] = {0, 0};
  for (ColorId c = 0; c < 2; ++c) {
    bool first = true;
    for (VertexId v = 0; v < n; ++v) {
      if (graph.color(v) != c) continue;
      if (first) {
        side_key[c] = v;
        first = false;
      }
      if (!(cfg.exclude_from_restart && is_influencer[v])) restart[c].push_back(v);
    }
    if (restart[c].empty())
      throw InputError(to_string(name) + ": side '" + graph.color_names()[c] + "' has no non-influencer vertices");
  }

  // A walk that can never meet an influencer would not terminate.
  bool has_dangling = false;
  for (VertexId v = 0; v < n; ++v)
    if (graph.out_degree(v) == 0) has_dangling = true;
  const bool jumps_everywhere = has_dangling && params.dangling == DanglingPolicy::uniform;
  for (ColorId c = 0; c < 2; ++c) {
    std::vector<char> seen(n, 0);
    std::vector<VertexId> stack(restart[c].begin(), restart[c].end());
    for (VertexId v : stack) seen[v] = 1;
    bool found = false;
    bool dangling_hit = false;
    while (!stack.empty() && !found) {
      const VertexId v = stack.back();
      stack.pop_back();
      if (is_influencer[v]) found = true;
      if (graph.out_degree(v) == 0) dangling_hit = true;
      for (VertexId w : graph.out_neighbors(v))
        if (!seen[w]) {
          seen[w] = 1;
          stack.push_back(w);
        }
    }
    if (!found && !(dangling_hit && jumps_everywhere))
      throw InputError(to_string(name) + ": side '" + graph.color_names()[c] + "' has no reachable influencers");
  }

  const WalkGraph wg(graph);
  constexpr std::size_t kChunk = 256;
  constexpr std::uint64_t kStepCap = 1ULL << 32;
  const std::size_t chunks = (walks + kChunk - 1) / kChunk;
  // counts[start][end] per chunk; integer sums are order independent.
  std::vector<std::array<std::uint64_t, 4>> chunk_counts(2 * chunks, {0, 0, 0, 0});
  std::atomic<bool> runaway{false};

  parallel_for(2 * chunks, [&](std::size_t job) {
    const ColorId c = static_cast<ColorId>(job / chunks);
    const std::size_t chunk = job % chunks;
    const auto& rs = restart[c];
    auto& counts = chunk_counts[job];
    for (std::size_t w = chunk * kChunk; w < std::min(walks, (chunk + 1) * kChunk); ++w) {
      Rng rng(derive_seed(seed, side_key[c], w));
      VertexId v = rs[rng.below(rs.size())];
      std::uint64_t steps = 0;
      while (!is_influencer[v]) {
        if (++steps > kStepCap) {
          runaway = true;
          return;
        }
        if (rng.uniform() < params.alpha) {
          if (graph.out_degree(v) > 0) v = wg.step(v, rng);
          else if (params.dangling == DanglingPolicy::uniform) v = static_cast<VertexId>(rng.below(n));
          else v = rs[rng.below(rs.size())];
        } else {
          v = rs[rng.below(rs.size())];
        }
      }
      ++counts[c * 2 + graph.color(v)];
    }
  });
  if (runaway) throw NumericalError(to_string(name) + ": a walk exceeded the step cap without meeting an influencer");

  std::uint64_t counts[4] = {0, 0, 0, 0};
  for (const auto& cc : chunk_counts)
    for (int i = 0; i < 4; ++i) counts[i] += cc[i];
  double p[2][2];  // p[start][end] = P(start side | end side)
  for (ColorId e = 0; e < 2; ++e) {
    const std::uint64_t total = counts[0 * 2 + e] + counts[1 * 2 + e];
    if (total == 0)
      throw NumericalError(to_string(name) + ": no walk ended at a '" + graph.color_names()[e] + "' influencer");
    for (ColorId s = 0; s < 2; ++s) p[s][e] = static_cast<double>(counts[s * 2 + e]) / static_cast<double>(total);
  }
  const double raw = p[0][0] * p[1][1] - p[0][1] * p[1][0];

  nlohmann::json params_json = diffusion_json(params);
  params_json["influencers"] = cfg.to_json();
  params_json["influencers_per_side"] = {influencer_count[0], influencer_count[1]};
  params_json["walks_per_side"] = walks;
  params_json["end_counts"] = {{counts[0], counts[1]}, {counts[2], counts[3]}};
  return finish(name, graph, raw, std::move(params_json), seed);
}

}  // namespace

MeasureResult rwc(const ColoredGraph& graph, const DiffusionParams& params, const InfluencerConfig& cfg,
                  std::size_t walks, std::uint64_t seed) {
  return random_walk_controversy(MeasureName::rwc, graph, params, cfg, walks, seed);
}

MeasureResult arwc(const ColoredGraph& graph, const DiffusionParams& params, double fraction, std::size_t walks,
                   std::uint64_t seed, bool exclude_from_restart) {
  InfluencerConfig cfg{InfluencerCount::fraction, 1, fraction, exclude_from_restart};
  return random_walk_controversy(MeasureName::arwc, graph, params, cfg, walks, seed);
}

// ---- edge-count measures ---------------------------------------------------

MeasureResult ei(const ColoredGraph& graph) {
  require_two_colors(graph, "EI");
  const auto w = color_weight_matrix(graph);
  const double internal = w[0] + w[3];
  const double external = w[1] + w[2];
  if (internal + external <= 0.0) throw InputError("EI: graph has no edges");
  return finish(MeasureName::ei, graph, (internal - external) / (internal + external),
                {{"internal_weight", internal}, {"external_weight", external}});
}

MeasureResult aei(const ColoredGraph& graph) {
  require_two_colors(graph, "AEI");
  const Partition part = partition(graph);
  const double a = static_cast<double>(part.size_r());
  const double b = static_cast<double>(part.size_b());
  if (part.size_r() < 2 || part.size_b() < 2)
    throw InputError("AEI: a community of size 1 has no internal density");
  const auto w = color_weight_matrix(graph);
  // Undirected totals of the symmetrized graph are half the directed totals.
  const double s_aa = (w[0] / 2.0) / (a * (a - 1.0) / 2.0);
  const double s_bb = (w[3] / 2.0) / (b * (b - 1.0) / 2.0);
  const double s_ab = ((w[1] + w[2]) / 2.0) / (a * b);
  const double denom = s_aa + s_bb + 2.0 * s_ab;
  if (denom <= 0.0) throw InputError("AEI: graph has no edges");
  return finish(MeasureName::aei, graph, (s_aa + s_bb - 2.0 * s_ab) / denom,
                {{"sigma_rr", s_aa}, {"sigma_bb", s_bb}, {"sigma_rb", s_ab}});
}

MeasureResult modularity_q(const ColoredGraph& graph) {
  require_two_colors(graph, "Q");
  const std::size_t k = graph.color_count();
  const auto w = color_weight_matrix(graph);
  double total = 0.0;
  for (double x : w) total += x;
  if (total <= 0.0) throw InputError("Q: graph has no edges");
  // Symmetrized degree of v is (out strength + in strength) / 2.
  std::vector<double> degree_sum(k, 0.0);
  for (VertexId v = 0; v < graph.vertex_count(); ++v) {
    double in = 0.0;
    for (double x : graph.in_weights(v)) in += x;
    degree_sum[graph.color(v)] += (graph.out_strength(v) + in) / 2.0;
  }
  double q = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double share = degree_sum[c] / total;
    q += w[c * k + c] / total - share * share;
  }
  return finish(MeasureName::q, graph, q, nlohmann::json::object());
}

MeasureResult color_assortativity(const ColoredGraph& graph) {
  require_two_colors(graph, "Col-Ass");
  const std::size_t k = graph.color_count();
  const auto w = color_weight_matrix(graph);
  double total = 0.0;
  for (double x : w) total += x;
  if (total <= 0.0) throw InputError("Col-Ass: graph has no edges");
  double trace = 0.0, ab = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    double a = 0.0, b = 0.0;
    for (std::size_t o = 0; o < k; ++o) {
      a += w[c * k + o];
      b += w[o * k + c];
    }
    trace += w[c * k + c] / total;
    ab += (a / total) * (b / total);
  }
  if (1.0 - ab <= 0.0) throw InputError("Col-Ass: degenerate margins");
  return finish(MeasureName::col_ass, graph, (trace - ab) / (1.0 - ab), {{"directed", true}});
}

// ---- boundary polarization -----------------------------------------------

MeasureResult boundary_polarization(const ColoredGraph& graph) {
  require_two_colors(graph, "BP");
  const auto sk = undirected_skeleton(graph);
  const std::size_t n = sk.vertex_count();
  std::vector<char> touches_other(n, 0);
  for (VertexId v = 0; v < n; ++v)
    for (VertexId u : sk.neighbors_of(v))
      if (graph.color(u) != graph.color(v)) touches_other[v] = 1;

  double total = 0.0;
  std::size_t boundary = 0;
  for (VertexId v = 0; v < n; ++v) {
    if (!touches_other[v]) continue;
    std::size_t internal = 0, cross = 0;
    for (VertexId u : sk.neighbors_of(v)) {
      if (graph.color(u) != graph.color(v)) ++cross;
      else if (!touches_other[u]) ++internal;
    }
    if (internal == 0) continue;  // no tie into its community's interior
    ++boundary;
    total += static_cast<double>(internal) / static_cast<double>(internal + cross);
  }
  const double raw = boundary == 0 ? 0.0 : total / static_cast<double>(boundary) - 0.5;
  return finish(MeasureName::bp, graph, raw, {{"boundary_size", boundary}});
}

// ---- betweenness centrality controversy ------------------------------------

std::vector<double> edge_betweenness(const UndirectedSkeleton& sk, bool weights_as_distances) {
  const std::size_t n = sk.vertex_count();
  const std::size_t slots = sk.neighbors.size();
  // mirror[i] is the slot of the same edge seen from the other endpoint.
  std::vector<std::size_t> mirror(slots);
  for (VertexId v = 0; v < n; ++v) {
    for (std::size_t i = sk.offsets[v]; i < sk.offsets[v + 1]; ++i) {
      const VertexId u = sk.neighbors[i];
      auto nb = sk.neighbors_of(u);
      mirror[i] = sk.offsets[u] + static_cast<std::size_t>(std::lower_bound(nb.begin(), nb.end(), v) - nb.begin());
    }
  }

  constexpr std::size_t kChunks = 64;
  const std::size_t chunks = std::min<std::size_t>(kChunks, n);
  std::vector<std::vector<double>> partial(chunks, std::vector<double>(slots, 0.0));
  parallel_for(chunks, [&](std::size_t chunk) {
    auto& acc = partial[chunk];
    std::vector<double> sigma(n), delta(n), dist(n);
    std::vector<std::vector<std::size_t>> pred_slots(n);  // slot (in pred's list) of edge pred -> w
    std::vector<VertexId> order;
    order.reserve(n);
    for (VertexId s = static_cast<VertexId>(chunk); s < n; s += static_cast<VertexId>(chunks)) {
      std::fill(sigma.begin(), sigma.end(), 0.0);
      std::fill(delta.begin(), delta.end(), 0.0);
      std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
      for (auto& p : pred_slots) p.clear();
      order.clear();
      sigma[s] = 1.0;
      dist[s] = 0.0;
      if (!weights_as_distances) {
        std::size_t head = 0;
        order.push_back(s);
        while (head < order.size()) {
          const VertexId v = order[head++];
          for (std::size_t i = sk.offsets[v]; i < sk.offsets[v + 1]; ++i) {
            const VertexId w = sk.neighbors[i];
            if (std::isinf(dist[w])) {
              dist[w] = dist[v] + 1.0;
              order.push_back(w);
            }
            if (dist[w] == dist[v] + 1.0) {
              sigma[w] += sigma[v];
              pred_slots[w].push_back(i);
            }
          }
        }
      } else {
        using Item = std::pair<double, VertexId>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        std::vector<char> settled(n, 0);
        heap.push({0.0, s});
        while (!heap.empty()) {
          auto [d, v] = heap.top();
          heap.pop();
          if (settled[v] || d > dist[v]) continue;
          settled[v] = 1;
          order.push_back(v);
          for (std::size_t i = sk.offsets[v]; i < sk.offsets[v + 1]; ++i) {
            const VertexId w = sk.neighbors[i];
            const double nd = d + sk.weights[i];
            if (nd < dist[w]) {
              dist[w] = nd;
              sigma[w] = sigma[v];
              pred_slots[w].assign(1, i);
              heap.push({nd, w});
            } else if (nd == dist[w] && !settled[w]) {
              sigma[w] += sigma[v];
              pred_slots[w].push_back(i);
            }
          }
        }
      }
      for (auto it = order.rbegin(); it != order.rend(); ++it) {
        const VertexId w = *it;
        for (std::size_t slot : pred_slots[w]) {
          const VertexId v = sk.neighbors[mirror[slot]];
          const double c = sigma[v] / sigma[w] * (1.0 + delta[w]);
          acc[slot] += c;
          delta[v] += c;
        }
      }
    }
  });

  std::vector<double> bc(slots, 0.0);
  for (const auto& p : partial)
    for (std::size_t i = 0; i < slots; ++i) bc[i] += p[i];
  // Each unordered pair was counted from both ends, and each edge in both slots.
  std::vector<double> out(slots);
  for (std::size_t i = 0; i < slots; ++i) out[i] = (bc[i] + bc[mirror[i]]) / 2.0;
  return out;
}

namespace {

double sample_sd(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double scott_bandwidth(const std::vector<double>& xs) {
  return sample_sd(xs) * std::pow(static_cast<double>(xs.size()), -0.2);
}

std::vector<double> kde_on_grid(const std::vector<double>& xs, double h, const std::vector<double>& grid) {
  std::vector<double> dens(grid.size(), 0.0);
  const double norm = 1.0 / (static_cast<double>(xs.size()) * h * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t g = 0; g < grid.size(); ++g) {
    double s = 0.0;
    for (double x : xs) {
      const double z = (grid[g] - x) / h;
      s += std::exp(-0.5 * z * z);
    }
    dens[g] = std::max(s * norm, 1e-12);
  }
  double total = 0.0;
  for (double d : dens) total += d;
  for (double& d : dens) d /= total;
  return dens;
}

}  // namespace

MeasureResult bcc(const ColoredGraph& graph, std::size_t bins, bool weights_as_distances) {
  require_two_colors(graph, "BCC");
  if (bins < 2) throw InputError("BCC needs at least 2 grid points");
  const auto sk = undirected_skeleton(graph);
  const auto bc = edge_betweenness(sk, weights_as_distances);
  std::vector<double> boundary, interior, pooled;
  for (VertexId v = 0; v < sk.vertex_count(); ++v) {
    for (std::size_t i = sk.offsets[v]; i < sk.offsets[v + 1]; ++i) {
      const VertexId u = sk.neighbors[i];
      if (u < v) continue;
      (graph.color(u) != graph.color(v) ? boundary : interior).push_back(bc[i]);
      pooled.push_back(bc[i]);
    }
  }
  if (boundary.empty() || interior.empty())
    throw InputError("BCC needs at least one boundary and one non-boundary edge");

  nlohmann::json params{{"bins", bins},
                        {"weights_as_distances", weights_as_distances},
                        {"boundary_edges", boundary.size()},
                        {"nonboundary_edges", interior.size()}};
  const double h_pool = scott_bandwidth(pooled);
  if (h_pool <= 0.0) {
    // Every edge has the same betweenness: the two distributions coincide.
    params["kl"] = 0.0;
    return finish(MeasureName::bcc, graph, 0.0, std::move(params));
  }
  double h_b = scott_bandwidth(boundary);
  double h_i = scott_bandwidth(interior);
  if (h_b <= 0.0) h_b = h_pool;
  if (h_i <= 0.0) h_i = h_pool;

  const auto [lo_it, hi_it] = std::minmax_element(pooled.begin(), pooled.end());
  const double pad = 3.0 * std::max(h_b, h_i);
  const double lo = *lo_it - pad, hi = *hi_it + pad;
  std::vector<double> grid(bins);
  for (std::size_t g = 0; g < bins; ++g) grid[g] = lo + (hi - lo) * static_cast<double>(g) / static_cast<double>(bins - 1);
  const auto p = kde_on_grid(boundary, h_b, grid);
  const auto q = kde_on_grid(interior, h_i, grid);
  double kl = 0.0;
  for (std::size_t g = 0; g < bins; ++g) kl += p[g] * std::log(p[g] / q[g]);
  kl = std::max(kl, 0.0);
  params["kl"] = kl;
  return finish(MeasureName::bcc, graph, 1.0 - std::exp(-kl), std::move(params));
}

// ---- dipole moment ----------------------------------------------------------

MeasureResult dipole_moment(const ColoredGraph& graph, const InfluencerConfig& cfg) {
  require_two_colors(graph, "DM");
  cfg.validate();
  const Partition part = partition(graph);
  const std::size_t n = graph.vertex_count();
  std::vector<double> x(n, 0.0);
  std::vector<char> clamped(n, 0);
  for (ColorId c = 0; c < 2; ++c) {
    const auto seeds = top_influencers(graph, c, cfg.count_for(part.color_sizes[c]));
    if (seeds.empty()) throw InputError("DM: a side has no seeds");
    for (VertexId v : seeds) {
      x[v] = c == 0 ? -1.0 : 1.0;
      clamped[v] = 1;
    }
  }
  const auto sk = undirected_skeleton(graph);
  constexpr double kTol = 1e-8;
  constexpr std::size_t kMaxSweeps = 100000;
  std::size_t sweeps = 0;
  for (;;) {
    double change = 0.0;
    for (VertexId v = 0; v < n; ++v) {
      if (clamped[v] || sk.degree(v) == 0) continue;
      auto nb = sk.neighbors_of(v);
      auto wt = sk.weights_of(v);
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < nb.size(); ++i) {
        num += wt[i] * x[nb[i]];
        den += wt[i];
      }
      const double nv = num / den;
      change = std::max(change, std::fabs(nv - x[v]));
      x[v] = nv;
    }
    ++sweeps;
    if (change < kTol) break;
    if (sweeps >= kMaxSweeps) throw NumericalError("DM: label propagation did not converge");
  }

  std::size_t n_pos = 0, n_neg = 0;
  double sum_pos = 0.0, sum_neg = 0.0;
  for (double v : x) {
    if (v > 0.0) {
      ++n_pos;
      sum_pos += v;
    } else if (v < 0.0) {
      ++n_neg;
      sum_neg += v;
    }
  }
  const double gc_pos = sum_pos / static_cast<double>(n_pos);
  const double gc_neg = sum_neg / static_cast<double>(n_neg);
  const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
  const double raw = (1.0 - std::fabs(np - nn) / (np + nn)) * std::fabs(gc_pos - gc_neg) / 2.0;
  nlohmann::json params{{"seeds", cfg.to_json()}, {"sweeps", sweeps}, {"n_pos", n_pos}, {"n_neg", n_neg}};
  return finish(MeasureName::dm, graph, std::clamp(raw, 0.0, 1.0), std::move(params));
}

// ---- community-based clustering agreement ----------------------------------

MeasureResult cca(const ColoredGraph& graph, double alpha_hop) {
  require_two_colors(graph, "CCA");
  if (!(alpha_hop > 0.0 && alpha_hop <= 1.0)) throw InputError("CCA hop weight must lie in (0, 1]");
  const auto sk = undirected_skeleton(graph);
  const std::size_t n = sk.vertex_count();
  const std::size_t k = graph.color_count();
  auto weight = [](ColorId a, ColorId b) { return a == b ? -1.0 : 1.0; };

  double total = 0.0;
  std::size_t counted = 0, skipped = 0;
  std::vector<double> ane_sum(k);
  std::vector<std::size_t> ane_count(k);
  for (VertexId i = 0; i < n; ++i) {
    const auto nbrs = sk.neighbors_of(i);
    if (nbrs.empty()) continue;
    const ColorId si = graph.color(i);
    double dne = 0.0;
    std::fill(ane_sum.begin(), ane_sum.end(), 0.0);
    std::fill(ane_count.begin(), ane_count.end(), 0);
    for (VertexId j : nbrs) {
      dne += weight(si, graph.color(j));
      const auto kj = sk.degree(j);
      if (kj <= 1) {
        ++skipped;
        continue;
      }
      // Neighbors of j other than i, weighted against i's community.
      double ne = 0.0;
      for (VertexId u : sk.neighbors_of(j))
        if (u != i) ne += weight(si, graph.color(u));
      ane_sum[graph.color(j)] += ne / static_cast<double>(kj - 1);
      ++ane_count[graph.color(j)];
    }
    dne /= static_cast<double>(nbrs.size());
    double ine = 0.0;
    std::size_t groups = 0;
    for (std::size_t c = 0; c < k; ++c) {
      if (ane_count[c] == 0) continue;
      ine += ane_sum[c] / static_cast<double>(ane_count[c]);
      ++groups;
    }
    if (groups > 0) ine /= static_cast<double>(groups);
    total += dne + alpha_hop * ine;
    ++counted;
  }
  if (counted == 0) throw InputError("CCA: graph has no edges");
  const double raw = -total / static_cast<double>(counted);
  return finish(MeasureName::cca, graph, raw, {{"alpha_hop", alpha_hop}, {"skipped_neighbors", skipped}});
}

// ---- dispatch ---------------------------------------------------------------

MeasureResult score_measure(MeasureName name, const ColoredGraph& graph, const MeasureOptions& o) {
  switch (name) {
    case MeasureName::rwc: return rwc(graph, o.diffusion, o.influencers, o.walks, o.seed);
    case MeasureName::arwc:
      return arwc(graph, o.diffusion, o.arwc_fraction, o.walks, o.seed, o.influencers.exclude_from_restart);
    case MeasureName::ei: return ei(graph);
    case MeasureName::aei: return aei(graph);
    case MeasureName::q: return modularity_q(graph);
    case MeasureName::col_ass: return color_assortativity(graph);
    case MeasureName::bp: return boundary_polarization(graph);
    case MeasureName::bcc: return bcc(graph, o.bcc_bins, o.bcc_weights_as_distances);
    case MeasureName::dm: return dipole_moment(graph, o.dm_influencers);
    case MeasureName::cca: return cca(graph, o.cca_alpha_hop);
    case MeasureName::dsp: {
      const DspResult r = o.sample_fraction ? dsp_sampled(graph, o.diffusion, *o.sample_fraction, o.seed)
                                            : dsp_exact(graph, o.diffusion);
      nlohmann::json params{{"result", to_json(r)}, {"diffusion", diffusion_json(o.diffusion)}};
      return finish(MeasureName::dsp, graph, r.value, std::move(params), r.seed);
    }
  }
  throw InputError("unknown measure");
}

}  // namespace polarimeter
