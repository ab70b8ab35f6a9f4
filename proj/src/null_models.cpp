#include "polarimeter/null_models.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <unordered_set>

#include "polarimeter/error.hpp"
#include "polarimeter/parallel.hpp"
#include "polarimeter/random.hpp"

namespace polarimeter {

ColoredGraph shuffle_labels(const ColoredGraph& graph, std::uint64_t seed) {
  if (!graph.has_colors()) throw InputError("shuffle_labels needs a colored graph");
  std::vector<ColorId> colors(graph.colors().begin(), graph.colors().end());
  Rng rng(seed);
  shuffle(std::span<ColorId>(colors), rng);
  return graph.recolored(std::move(colors), graph.color_names());
}

ColoredGraph configuration_sample(const ColoredGraph& graph, double swaps_per_edge, std::uint64_t seed) {
  if (!(swaps_per_edge >= 0.0) || !std::isfinite(swaps_per_edge)) throw InputError("swaps per edge must be >= 0");
  const auto sk = undirected_skeleton(graph);
  std::vector<std::pair<VertexId, VertexId>> edges;
  for (VertexId v = 0; v < sk.vertex_count(); ++v)
    for (VertexId u : sk.neighbors_of(v))
      if (v < u) edges.emplace_back(v, u);
  if (edges.size() < 2 || graph.vertex_count() < 4)
    throw InputError("configuration model: graph too small for a double-edge swap");

  auto key = [](VertexId a, VertexId b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | b;
  };
  std::unordered_set<std::uint64_t> present;
  present.reserve(edges.size() * 2);
  for (auto [a, b] : edges) present.insert(key(a, b));

  Rng rng(seed);
  const auto attempts = static_cast<std::uint64_t>(std::ceil(swaps_per_edge * static_cast<double>(edges.size())));
  for (std::uint64_t t = 0; t < attempts; ++t) {
    const auto i = static_cast<std::size_t>(rng.below(edges.size()));
    const auto j = static_cast<std::size_t>(rng.below(edges.size()));
    const bool flip = (rng() & 1U) != 0;
    if (i == j) continue;
    auto [a, b] = edges[i];
    auto [c, d] = edges[j];
    if (flip) std::swap(c, d);
    // (a,b),(c,d) -> (a,d),(c,b)
    if (a == d || c == b) continue;
    if (present.count(key(a, d)) || present.count(key(c, b))) continue;
    present.erase(key(a, b));
    present.erase(key(c, d));
    present.insert(key(a, d));
    present.insert(key(c, b));
    edges[i] = {a, d};
    edges[j] = {c, b};
  }

  std::vector<Edge> out;
  out.reserve(edges.size() * 2);
  for (auto [a, b] : edges) {
    out.push_back({a, b, 1.0});
    out.push_back({b, a, 1.0});
  }
  auto g = ColoredGraph::from_edges(graph.vertex_count(), std::move(out), graph.vertex_names());
  if (!graph.has_colors()) return g;
  return g.recolored(std::vector<ColorId>(graph.colors().begin(), graph.colors().end()), graph.color_names());
}

std::vector<ColoredGraph> load_external_samples(const std::filesystem::path& dir, const ColoredGraph& observed,
                                                bool directed) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw InputError("external sample directory not found: " + dir.string());
  std::map<std::string, std::pair<fs::path, fs::path>> pairs;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension().string();
    const auto stem = entry.path().stem().string();
    if (ext == ".edges") pairs[stem].first = entry.path();
    else if (ext == ".labels") pairs[stem].second = entry.path();
  }
  if (pairs.empty()) throw InputError("no external samples in " + dir.string());

  const std::set<std::string> expected(observed.vertex_names().begin(), observed.vertex_names().end());
  std::vector<ColoredGraph> samples;
  for (const auto& [stem, files] : pairs) {
    if (files.first.empty()) throw InputError("external sample '" + stem + "' has labels but no edge list");
    if (files.second.empty()) throw InputError("external sample '" + stem + "' has an edge list but no labels");
    ColoredGraph g = load_colored_graph(files.first, files.second, directed);
    const std::set<std::string> names(g.vertex_names().begin(), g.vertex_names().end());
    if (names != expected)
      throw InputError("external sample " + files.first.string() + " does not match the observed vertex names");
    samples.push_back(std::move(g));
  }
  return samples;
}

std::string to_string(NullKind kind) {
  switch (kind) {
    case NullKind::label_shuffle: return "label_shuffle";
    case NullKind::configuration: return "configuration";
    case NullKind::external: return "external";
  }
  return "?";
}

std::string to_string(DenoiseMode mode) { return mode == DenoiseMode::subtract ? "subtract" : "zscore"; }

double nearest_rank_quantile(std::vector<double> values, double q) {
  if (values.empty()) throw InputError("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const auto rank = static_cast<std::ptrdiff_t>(std::ceil(q * static_cast<double>(values.size()) - 1e-12));
  const auto idx = std::clamp<std::ptrdiff_t>(rank - 1, 0, static_cast<std::ptrdiff_t>(values.size()) - 1);
  return values[static_cast<std::size_t>(idx)];
}

SampleSummary summarize(const std::vector<double>& values) {
  if (values.empty()) throw InputError("cannot summarize an empty sample");
  SampleSummary s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    s.mean = *lo;  // keeps the spread of a constant sample at exactly 0
  } else if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  s.quantiles = {nearest_rank_quantile(values, 0.05), nearest_rank_quantile(values, 0.5),
                 nearest_rank_quantile(values, 0.95)};
  return s;
}

nlohmann::json to_json(const EnsembleReport& r) {
  nlohmann::json j;
  j["measure"] = r.measure;
  j["observed"] = r.observed;
  j["null_mean"] = r.null_mean;
  j["null_sd"] = r.null_sd;
  j["quantiles"] = {{"0.05", r.quantiles[0]}, {"0.5", r.quantiles[1]}, {"0.95", r.quantiles[2]}};
  j["samples"] = r.samples;
  j["null_kind"] = to_string(r.null_kind);
  j["n_samples"] = r.n_samples;
  j["requested"] = r.requested;
  j["failures"] = r.failures;
  j["seed"] = r.seed;
  j["mode"] = to_string(r.mode);
  j["denoised"] = r.denoised;
  return j;
}

EnsembleReport denoise(const ColoredGraph& graph, const DenoiseRequest& req) {
  const std::size_t count = req.null_kind == NullKind::external ? req.external.size() : req.n_samples;
  if (count == 0)
    throw InputError(req.null_kind == NullKind::external ? "no external null samples" : "n_samples must be positive");

  EnsembleReport report;
  report.measure = to_string(req.measure);
  report.null_kind = req.null_kind;
  report.requested = count;
  report.seed = req.seed;
  report.mode = req.mode;
  report.observed = score_measure(req.measure, graph, req.options).raw;

  std::vector<std::optional<double>> values(count);
  std::vector<std::string> errors(count);
  parallel_for(count, [&](std::size_t i) {
    try {
      const std::uint64_t sample_seed = derive_seed(req.seed, i, 0);
      MeasureOptions opts = req.options;
      opts.seed = derive_seed(req.seed, i, 1);
      switch (req.null_kind) {
        case NullKind::label_shuffle:
          values[i] = score_measure(req.measure, shuffle_labels(graph, sample_seed), opts).raw;
          break;
        case NullKind::configuration:
          values[i] = score_measure(req.measure, configuration_sample(graph, req.swaps_per_edge, sample_seed), opts).raw;
          break;
        case NullKind::external:
          values[i] = score_measure(req.measure, req.external[i], opts).raw;
          break;
      }
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });

  for (std::size_t i = 0; i < count; ++i) {
    if (values[i]) report.samples.push_back(*values[i]);
    else report.failures.push_back("sample " + std::to_string(i) + ": " + errors[i]);
  }
  report.n_samples = report.samples.size();
  if (report.failures.size() * 5 > count) {
    std::string msg = report.measure + ": " + std::to_string(report.failures.size()) + " of " +
                      std::to_string(count) + " null samples failed";
    msg += "; first: " + report.failures.front();
    throw NumericalError(msg);
  }

  const SampleSummary s = summarize(report.samples);
  report.null_mean = s.mean;
  report.null_sd = s.sd;
  report.quantiles = s.quantiles;
  if (req.mode == DenoiseMode::subtract) {
    report.denoised = report.observed - report.null_mean;
  } else {
    if (!(report.null_sd > 0.0)) throw NumericalError(report.measure + ": null sd is 0, z-score undefined");
    report.denoised = (report.observed - report.null_mean) / report.null_sd;
  }
  return report;
}

}  // namespace polarimeter
