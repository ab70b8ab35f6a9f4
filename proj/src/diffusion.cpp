#include "polarimeter/diffusion.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "polarimeter/error.hpp"
#include "polarimeter/parallel.hpp"

namespace polarimeter {

std::string to_string(DanglingPolicy policy) {
  return policy == DanglingPolicy::uniform ? "uniform" : "source";
}

DanglingPolicy parse_dangling_policy(const std::string& text) {
  if (text == "uniform") return DanglingPolicy::uniform;
  if (text == "source") return DanglingPolicy::source;
  throw InputError("unknown dangling policy '" + text + "' (expected uniform or source)");
}

void DiffusionParams::validate() const {
  if (!(alpha > 0.0 && alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  if (!(tolerance > 0.0) || !std::isfinite(tolerance)) throw InputError("tolerance must be positive");
  if (max_iterations == 0) throw InputError("max_iterations must be positive");
}

namespace {

std::atomic<std::size_t> block_width_override{0};
constexpr std::size_t kDefaultBlockWidth = 16;

// Pull form of the transition: y[v] = sum over in-edges (u -> v) of coef * x[u],
// with coef = w_uv / W_u fixed once so every caller rounds identically.
struct Operator {
  std::size_t n = 0;
  std::vector<std::size_t> offsets;
  std::vector<VertexId> from;
  std::vector<double> coef;
  std::vector<VertexId> dangling;
};

Operator build_operator(const ColoredGraph& graph) {
  Operator op;
  op.n = graph.vertex_count();
  op.offsets.assign(op.n + 1, 0);
  op.from.reserve(graph.edge_count());
  op.coef.reserve(graph.edge_count());
  for (VertexId v = 0; v < op.n; ++v) {
    auto nb = graph.in_neighbors(v);
    auto wt = graph.in_weights(v);
    for (std::size_t i = 0; i < nb.size(); ++i) {
      op.from.push_back(nb[i]);
      op.coef.push_back(wt[i] / graph.out_strength(nb[i]));
    }
    op.offsets[v + 1] = op.from.size();
    if (graph.out_degree(v) == 0) op.dangling.push_back(v);
  }
  return op;
}

std::string vertex_label(const ColoredGraph& graph, VertexId v) {
  return "'" + graph.vertex_names()[v] + "' (index " + std::to_string(v) + ")";
}

// Advances B sources at once. Lanes never mix, and every lane performs the same
// operations in the same order as a single-lane run, so each result is
// independent of its batch companions and of B. Lane b is written to
// out[b * n .. (b + 1) * n) as soon as it converges.
template <std::size_t B>
void run_block(const ColoredGraph& graph, const Operator& op, const DiffusionParams& params,
               const VertexId* sources, std::size_t count, double* out) {
  const std::size_t n = op.n;
  std::vector<double> x(n * B, 0.0), y(n * B, 0.0);
  VertexId src[B];
  bool done[B];
  for (std::size_t b = 0; b < B; ++b) {
    src[b] = sources[std::min(b, count - 1)];
    done[b] = b >= count;
    x[src[b] * B + b] = 1.0;
  }
  const double alpha = params.alpha;
  const double restart = 1.0 - alpha;
  const double inv_n = 1.0 / static_cast<double>(n);
  const bool uniform = params.dangling == DanglingPolicy::uniform;
  const std::size_t* offs = op.offsets.data();
  const VertexId* from = op.from.data();
  const double* coef = op.coef.data();

  double resid[B];
  for (std::size_t it = 1; it <= params.max_iterations; ++it) {
    double share[B] = {};
    double to_source[B] = {};
    if (!op.dangling.empty()) {
      double dsum[B] = {};
      for (VertexId u : op.dangling)
        for (std::size_t b = 0; b < B; ++b) dsum[b] += x[u * B + b];
      for (std::size_t b = 0; b < B; ++b) {
        if (uniform) share[b] = dsum[b] * inv_n;
        else to_source[b] = dsum[b];
      }
    }

    const double* xp = x.data();
    double* yp = y.data();
    for (std::size_t v = 0; v < n; ++v) {
      double acc[B] = {};
      for (std::size_t e = offs[v]; e < offs[v + 1]; ++e) {
        const double c = coef[e];
        const double* xu = xp + static_cast<std::size_t>(from[e]) * B;
        for (std::size_t b = 0; b < B; ++b) acc[b] += c * xu[b];
      }
      double* yv = yp + v * B;
      for (std::size_t b = 0; b < B; ++b) yv[b] = alpha * (acc[b] + share[b]);
    }
    for (std::size_t b = 0; b < B; ++b) {
      double& ys = yp[src[b] * B + b];
      if (!uniform) ys += alpha * to_source[b];
      ys += restart;
    }

    for (std::size_t b = 0; b < B; ++b) resid[b] = 0.0;
    for (std::size_t v = 0; v < n; ++v)
      for (std::size_t b = 0; b < B; ++b) resid[b] += std::fabs(yp[v * B + b] - xp[v * B + b]);

    bool all_done = true;
    for (std::size_t b = 0; b < B; ++b) {
      if (done[b]) continue;
      if (resid[b] < params.tolerance) {
        double* dst = out + b * n;
        for (std::size_t v = 0; v < n; ++v) dst[v] = yp[v * B + b];
        done[b] = true;
      } else {
        all_done = false;
      }
    }
    if (all_done) return;
    std::swap(x, y);
  }
  for (std::size_t b = 0; b < count; ++b) {
    if (!done[b]) {
      std::ostringstream msg;
      msg << "diffusion from source " << vertex_label(graph, src[b]) << " did not converge after "
          << params.max_iterations << " iterations (residual " << resid[b] << ")";
      throw NumericalError(msg.str());
    }
  }
}

using BlockFn = void (*)(const ColoredGraph&, const Operator&, const DiffusionParams&, const VertexId*,
                         std::size_t, double*);

BlockFn block_kernel(std::size_t width) {
  switch (width) {
    case 1: return &run_block<1>;
    case 2: return &run_block<2>;
    case 4: return &run_block<4>;
    case 8: return &run_block<8>;
    case 16: return &run_block<16>;
    case 32: return &run_block<32>;
    default: throw InputError("unsupported diffusion block width " + std::to_string(width));
  }
}

void check_sources(const ColoredGraph& graph, std::span<const VertexId> sources) {
  for (VertexId s : sources)
    if (s >= graph.vertex_count()) throw InputError("diffusion source out of range: " + std::to_string(s));
}

void check_graph(const ColoredGraph& graph) {
  if (graph.vertex_count() < 2) throw InputError("diffusion needs at least 2 vertices");
}

}  // namespace

std::size_t diffusion_block_width() {
  const std::size_t w = block_width_override.load();
  return w != 0 ? w : kDefaultBlockWidth;
}

void set_diffusion_block_width(std::size_t width) {
  if (width != 0) block_kernel(width);
  block_width_override.store(width);
}

std::vector<double> transition_step(const ColoredGraph& graph, std::span<const double> mass,
                                    const DiffusionParams& params, std::optional<VertexId> source) {
  const std::size_t n = graph.vertex_count();
  if (mass.size() != n) throw InputError("mass vector size does not match vertex count");
  if (params.dangling == DanglingPolicy::source && !source)
    throw InputError("teleport-to-source dangling policy needs a source");
  double dsum = 0.0;
  for (VertexId u = 0; u < n; ++u)
    if (graph.out_degree(u) == 0) dsum += mass[u];
  const double share = params.dangling == DanglingPolicy::uniform ? dsum / static_cast<double>(n) : 0.0;

  std::vector<double> out(n);
  for (VertexId v = 0; v < n; ++v) {
    auto nb = graph.in_neighbors(v);
    auto wt = graph.in_weights(v);
    double acc = 0.0;
    for (std::size_t i = 0; i < nb.size(); ++i) acc += (wt[i] / graph.out_strength(nb[i])) * mass[nb[i]];
    out[v] = acc + share;
  }
  if (params.dangling == DanglingPolicy::source) out[*source] += dsum;
  return out;
}

void normalize_p_hat_in_place(std::span<double> pi, VertexId source) {
  if (source >= pi.size()) throw InputError("p_hat source out of range");
  pi[source] = 0.0;
  double sum = 0.0;
  for (double v : pi) sum += v;
  if (!(sum > 0.0)) throw NumericalError("p_hat undefined: all diffusion mass from source " +
                                         std::to_string(source) + " stays at the source");
  for (double& v : pi) v /= sum;
}

std::vector<double> normalize_p_hat(std::span<const double> pi, VertexId source) {
  std::vector<double> out(pi.begin(), pi.end());
  normalize_p_hat_in_place(out, source);
  return out;
}

void stream_diffusions(const ColoredGraph& graph, const DiffusionParams& params,
                       std::span<const VertexId> sources, const DiffusionSink& sink) {
  params.validate();
  check_graph(graph);
  check_sources(graph, sources);
  if (sources.empty()) return;

  const Operator op = build_operator(graph);
  const std::size_t n = op.n;
  const std::size_t width = std::min(diffusion_block_width(), std::bit_ceil(sources.size()));
  const BlockFn kernel = block_kernel(width);
  const std::size_t total_blocks = (sources.size() + width - 1) / width;
  const std::size_t wave_blocks = std::max<std::size_t>(1, max_threads());
  std::vector<double> buffer(std::min(wave_blocks, total_blocks) * width * n);

  for (std::size_t first = 0; first < total_blocks; first += wave_blocks) {
    const std::size_t blocks = std::min(wave_blocks, total_blocks - first);
    parallel_for(blocks, [&](std::size_t i) {
      const std::size_t begin = (first + i) * width;
      const std::size_t count = std::min(width, sources.size() - begin);
      kernel(graph, op, params, sources.data() + begin, count, buffer.data() + i * width * n);
    });
    for (std::size_t i = 0; i < blocks; ++i) {
      const std::size_t begin = (first + i) * width;
      const std::size_t count = std::min(width, sources.size() - begin);
      for (std::size_t b = 0; b < count; ++b)
        sink(sources[begin + b], std::span<const double>(buffer.data() + (i * width + b) * n, n));
    }
  }
}

void stream_diffusions(const ColoredGraph& graph, const DiffusionParams& params, const DiffusionSink& sink) {
  std::vector<VertexId> all(graph.vertex_count());
  for (VertexId v = 0; v < all.size(); ++v) all[v] = v;
  stream_diffusions(graph, params, all, sink);
}

DiffusionVector rwr_vector(const ColoredGraph& graph, VertexId source, const DiffusionParams& params) {
  auto out = all_sources_diffusion(graph, params, std::span<const VertexId>(&source, 1));
  return std::move(out.front());
}

std::vector<DiffusionVector> all_sources_diffusion(const ColoredGraph& graph, const DiffusionParams& params,
                                                   std::optional<std::span<const VertexId>> sources) {
  std::vector<VertexId> all;
  if (!sources) {
    all.resize(graph.vertex_count());
    for (VertexId v = 0; v < all.size(); ++v) all[v] = v;
    sources = std::span<const VertexId>(all);
  }
  std::vector<DiffusionVector> result;
  result.reserve(sources->size());
  stream_diffusions(graph, params, *sources, [&](VertexId s, std::span<const double> pi) {
    DiffusionVector dv;
    dv.source = s;
    dv.pi.assign(pi.begin(), pi.end());
    dv.p_hat = normalize_p_hat(pi, s);
    result.push_back(std::move(dv));
  });
  return result;
}

// ---- cache ---------------------------------------------------------------

namespace {

nlohmann::json cache_header(const ColoredGraph& graph, const DiffusionParams& params) {
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(structure_hash(graph)));
  return {{"format", "polarimeter-diffusion-cache/1"},
          {"n", graph.vertex_count()},
          {"alpha", params.alpha},
          {"tolerance", params.tolerance},
          {"max_iterations", params.max_iterations},
          {"policy", to_string(params.dangling)},
          {"graph_hash", hash}};
}

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) return __builtin_bswap64(v);
  return v;
}

}  // namespace

void save_diffusion_cache(const std::filesystem::path& path, const ColoredGraph& graph,
                          const DiffusionParams& params, std::span<const DiffusionVector> vectors) {
  const std::size_t n = graph.vertex_count();
  if (vectors.size() != n) throw InputError("diffusion cache needs one vector per vertex");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  out << cache_header(graph, params).dump() << '\n';
  std::vector<std::uint64_t> row(n);
  for (VertexId s = 0; s < n; ++s) {
    const auto& dv = vectors[s];
    if (dv.source != s || dv.pi.size() != n) throw InputError("diffusion cache vectors must be ordered by source");
    for (std::size_t i = 0; i < n; ++i) row[i] = to_little(std::bit_cast<std::uint64_t>(dv.pi[i]));
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(n * sizeof(std::uint64_t)));
  }
  if (!out) throw InputError("write failed: " + path.string());
}

std::optional<std::vector<DiffusionVector>> load_diffusion_cache(const std::filesystem::path& path,
                                                                 const ColoredGraph& graph,
                                                                 const DiffusionParams& params) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::string header_line;
  if (!std::getline(in, header_line)) return std::nullopt;
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(header_line);
  } catch (const nlohmann::json::exception&) {
    return std::nullopt;
  }
  if (header != cache_header(graph, params)) return std::nullopt;

  const std::size_t n = graph.vertex_count();
  std::vector<DiffusionVector> vectors(n);
  std::vector<std::uint64_t> row(n);
  for (VertexId s = 0; s < n; ++s) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(n * sizeof(std::uint64_t)));
    if (!in) throw InputError("diffusion cache truncated: " + path.string());
    auto& dv = vectors[s];
    dv.source = s;
    dv.pi.resize(n);
    for (std::size_t i = 0; i < n; ++i) dv.pi[i] = std::bit_cast<double>(to_little(row[i]));
    dv.p_hat = normalize_p_hat(dv.pi, s);
  }
  return vectors;
}

}  // namespace polarimeter
