#include "polarimeter/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "polarimeter/error.hpp"
#include "polarimeter/random.hpp"

namespace polarimeter {
namespace {

const std::vector<std::string>& two_color_names() {
  static const std::vector<std::string> names{"red", "blue"};
  return names;
}

void add_pair(std::vector<Edge>& edges, VertexId a, VertexId b) {
  edges.push_back({a, b, 1.0});
  edges.push_back({b, a, 1.0});
}

ColoredGraph build(std::size_t n, std::vector<Edge> edges, std::vector<ColorId> colors) {
  return ColoredGraph::from_edges(n, std::move(edges)).recolored(std::move(colors), two_color_names());
}

std::vector<ColorId> block_colors(std::size_t n_red, std::size_t n) {
  std::vector<ColorId> colors(n, 1);
  for (std::size_t i = 0; i < n_red; ++i) colors[i] = 0;
  return colors;
}

void add_clique(std::vector<Edge>& edges, VertexId first, std::size_t size) {
  for (VertexId i = first; i < first + size; ++i)
    for (VertexId j = first; j < first + size; ++j)
      if (i != j) edges.push_back({i, j, 1.0});
}

void check_probability(double p, const char* name, bool allow_zero) {
  if (!std::isfinite(p) || p > 1.0 || p < 0.0 || (!allow_zero && p == 0.0))
    throw InputError(std::string(name) + " must lie in " + (allow_zero ? "[0, 1]" : "(0, 1]"));
}

// Batagelj-Brandes skipping over the pairs (w < v) of [0, n).
template <typename Fn>
void for_each_gnp_pair(std::size_t n, double p, Rng& rng, Fn&& fn) {
  if (p <= 0.0 || n < 2) return;
  if (p >= 1.0) {
    for (std::size_t v = 1; v < n; ++v)
      for (std::size_t w = 0; w < v; ++w) fn(w, v);
    return;
  }
  const double log_q = std::log1p(-p);
  std::int64_t v = 1;
  std::int64_t w = -1;
  const auto nn = static_cast<std::int64_t>(n);
  while (v < nn) {
    const double r = rng.uniform();
    w += 1 + static_cast<std::int64_t>(std::floor(std::log1p(-r) / log_q));
    while (w >= v && v < nn) {
      w -= v;
      ++v;
    }
    if (v < nn) fn(static_cast<std::size_t>(w), static_cast<std::size_t>(v));
  }
}

std::vector<ColorId> shuffled_labels(const std::vector<std::size_t>& counts, Rng& rng) {
  std::vector<ColorId> colors;
  for (ColorId c = 0; c < counts.size(); ++c) colors.insert(colors.end(), counts[c], c);
  shuffle(std::span<ColorId>(colors), rng);
  return colors;
}

std::vector<std::string> color_names_for(std::size_t k) {
  std::vector<std::string> names = two_color_names();
  names.resize(std::max<std::size_t>(k, 2));
  for (std::size_t c = 2; c < k; ++c) names[c] = "c" + std::to_string(c);
  names.resize(k);
  return names;
}

template <typename Draw>
ColoredGraph with_policy(Draw&& draw, std::uint64_t seed, const GnplOptions& options, const char* what) {
  if (options.policy != DisconnectedPolicy::reject_and_resample) {
    ColoredGraph g = draw(seed);
    if (options.policy == DisconnectedPolicy::take_lwcc) return largest_weak_component(g);
    return g;
  }
  for (std::size_t attempt = 0; attempt <= options.retry_budget; ++attempt) {
    ColoredGraph g = draw(attempt == 0 ? seed : derive_seed(seed, attempt));
    if (is_weakly_connected(g)) return g;
  }
  throw InputError(std::string(what) + ": no connected sample within " + std::to_string(options.retry_budget) +
                   " retries; use the take_lwcc policy or a denser graph");
}

}  // namespace

ColoredGraph gen_clique(std::size_t n_red, std::size_t n_blue) {
  const std::size_t n = n_red + n_blue;
  if (n < 2) throw InputError("clique needs at least 2 vertices");
  std::vector<Edge> edges;
  edges.reserve(n * (n - 1));
  add_clique(edges, 0, n);
  return build(n, std::move(edges), block_colors(n_red, n));
}

ColoredGraph gen_alternating_cycle(std::size_t n) {
  if (n < 4 || n % 2 != 0) throw InputError("alternating cycle needs an even n >= 4");
  std::vector<Edge> edges;
  std::vector<ColorId> colors(n);
  for (VertexId v = 0; v < n; ++v) {
    add_pair(edges, v, static_cast<VertexId>((v + 1) % n));
    colors[v] = v % 2;
  }
  return build(n, std::move(edges), std::move(colors));
}

ColoredGraph gen_half_split_cycle(std::size_t n_red, std::size_t n_blue) {
  const std::size_t n = n_red + n_blue;
  if (n_red == 0 || n_blue == 0) throw InputError("half-split cycle needs both colors");
  if (n < 3) throw InputError("half-split cycle needs at least 3 vertices");
  std::vector<Edge> edges;
  for (VertexId v = 0; v < n; ++v) add_pair(edges, v, static_cast<VertexId>((v + 1) % n));
  return build(n, std::move(edges), block_colors(n_red, n));
}

ColoredGraph gen_barbell(std::size_t clique_size, std::size_t path_length) {
  return gen_barbell(clique_size, clique_size, path_length);
}

ColoredGraph gen_barbell(std::size_t red_clique, std::size_t blue_clique, std::size_t path_length) {
  if (red_clique < 2 || blue_clique < 2) throw InputError("barbell cliques need at least 2 vertices");
  if (path_length % 2 != 0) throw InputError("barbell path length must be even");
  const std::size_t half = path_length / 2;
  const std::size_t n = red_clique + blue_clique + path_length;
  std::vector<Edge> edges;
  add_clique(edges, 0, red_clique);
  const auto blue_start = static_cast<VertexId>(red_clique + path_length);
  add_clique(edges, blue_start, blue_clique);
  // Chain from the last red clique vertex to the first blue clique vertex.
  for (auto v = static_cast<VertexId>(red_clique - 1); v < blue_start; ++v) add_pair(edges, v, v + 1);
  return build(n, std::move(edges), block_colors(red_clique + half, n));
}

std::string to_string(DisconnectedPolicy policy) {
  switch (policy) {
    case DisconnectedPolicy::reject_and_resample: return "reject";
    case DisconnectedPolicy::take_lwcc: return "lwcc";
    case DisconnectedPolicy::keep: return "keep";
  }
  return "?";
}

DisconnectedPolicy parse_disconnected_policy(const std::string& text) {
  if (text == "reject") return DisconnectedPolicy::reject_and_resample;
  if (text == "lwcc") return DisconnectedPolicy::take_lwcc;
  if (text == "keep") return DisconnectedPolicy::keep;
  throw InputError("unknown disconnected policy '" + text + "' (expected reject, lwcc or keep)");
}

ColoredGraph gen_gnpl(std::size_t n, double p, const std::vector<std::size_t>& color_counts, std::uint64_t seed,
                      const GnplOptions& options) {
  check_probability(p, "p", false);
  std::size_t total = 0;
  for (auto c : color_counts) total += c;
  if (total != n) throw InputError("color counts must sum to n");
  if (n < 2) throw InputError("G(n,p,l) needs n >= 2");
  auto draw = [&](std::uint64_t s) {
    Rng rng(s);
    std::vector<Edge> edges;
    edges.reserve(static_cast<std::size_t>(p * static_cast<double>(n) * static_cast<double>(n - 1)) + 16);
    for_each_gnp_pair(n, p, rng, [&](std::size_t a, std::size_t b) {
      add_pair(edges, static_cast<VertexId>(a), static_cast<VertexId>(b));
    });
    Rng label_rng(derive_seed(s, 0x6c6162656cULL));
    return ColoredGraph::from_edges(n, std::move(edges))
        .recolored(shuffled_labels(color_counts, label_rng), color_names_for(color_counts.size()));
  };
  return with_policy(draw, seed, options, "G(n,p,l)");
}

ColoredGraph gen_sbm(std::size_t n, double p_in, double q_out, std::uint64_t seed) {
  if (n < 2 || n % 2 != 0) throw InputError("SBM needs an even n >= 2");
  check_probability(p_in, "p_in", true);
  check_probability(q_out, "q_out", true);
  if (p_in == 0.0 && q_out == 0.0) throw InputError("SBM with p_in = q_out = 0 is empty");
  Rng label_rng(derive_seed(seed, 0x6c6162656cULL));
  std::vector<ColorId> colors = shuffled_labels({n / 2, n / 2}, label_rng);
  Rng rng(seed);
  std::vector<Edge> edges;
  for (VertexId v = 1; v < n; ++v) {
    for (VertexId w = 0; w < v; ++w) {
      const double prob = colors[v] == colors[w] ? p_in : q_out;
      if (rng.uniform() < prob) add_pair(edges, w, v);
    }
  }
  if (edges.empty()) throw InputError("SBM sample has no edges");
  return build(n, std::move(edges), std::move(colors));
}

std::string to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::clique: return "clique";
    case GeneratorKind::alternating_cycle: return "alternating-cycle";
    case GeneratorKind::half_split_cycle: return "half-split-cycle";
    case GeneratorKind::barbell: return "barbell";
    case GeneratorKind::gnpl: return "gnpl";
    case GeneratorKind::sbm: return "sbm";
  }
  return "?";
}

GeneratorKind parse_generator_kind(const std::string& text) {
  for (auto k : {GeneratorKind::clique, GeneratorKind::alternating_cycle, GeneratorKind::half_split_cycle,
                 GeneratorKind::barbell, GeneratorKind::gnpl, GeneratorKind::sbm})
    if (text == to_string(k)) return k;
  throw InputError("unknown generator '" + text + "'");
}

std::vector<std::size_t> split_counts(std::size_t n, double red_fraction) {
  if (!(red_fraction > 0.0 && red_fraction < 1.0)) throw InputError("red fraction must lie in (0, 1)");
  auto red = static_cast<std::size_t>(std::llround(red_fraction * static_cast<double>(n)));
  red = std::clamp<std::size_t>(red, 1, n - 1);
  return {red, n - red};
}

ColoredGraph generate(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case GeneratorKind::clique: return gen_clique(spec.n_red, spec.n_blue);
    case GeneratorKind::alternating_cycle: return gen_alternating_cycle(spec.n);
    case GeneratorKind::half_split_cycle: return gen_half_split_cycle(spec.n_red, spec.n_blue);
    case GeneratorKind::barbell:
      return gen_barbell(spec.n_red, spec.n_blue == 0 ? spec.n_red : spec.n_blue, spec.path_length);
    case GeneratorKind::gnpl:
      if (spec.n < 2) throw InputError("G(n,p,l) needs n >= 2");
      return gen_gnpl(spec.n, spec.p, split_counts(spec.n, spec.red_fraction), spec.seed, {spec.policy, 100});
    case GeneratorKind::sbm:
      return with_policy([&](std::uint64_t s) { return gen_sbm(spec.n, spec.p, spec.q, s); }, spec.seed,
                         {spec.policy, 100}, "SBM");
  }
  throw InputError("unknown generator kind");
}

GeneratorSpec with_member_seed(GeneratorSpec spec, std::uint64_t member) {
  spec.seed = derive_seed(spec.seed, member);
  return spec;
}

}  // namespace polarimeter
