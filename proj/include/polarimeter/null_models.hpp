#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarimeter/baselines.hpp"
#include "polarimeter/graph.hpp"

namespace polarimeter {

/// Uniform permutation of the colors; the structure is shared, not copied.
ColoredGraph shuffle_labels(const ColoredGraph& graph, std::uint64_t seed);

/// Degree-preserving double-edge swaps on the undirected simple skeleton.
/// ceil(swaps_per_edge * |E|) swaps are attempted; swaps that would create a
/// self-loop or a repeated edge are rejected. Output is bidirected with unit
/// weights, same vertex names and colors.
ColoredGraph configuration_sample(const ColoredGraph& graph, double swaps_per_edge, std::uint64_t seed);

/// Pairs `<stem>.edges` with `<stem>.labels` in `dir`, in stem order. Each
/// sample must carry exactly the vertex names of `observed`.
std::vector<ColoredGraph> load_external_samples(const std::filesystem::path& dir, const ColoredGraph& observed,
                                                bool directed = true);

enum class NullKind { label_shuffle, configuration, external };
enum class DenoiseMode { subtract, zscore };

std::string to_string(NullKind kind);
std::string to_string(DenoiseMode mode);

struct SampleSummary {
  double mean = 0.0;
  double sd = 0.0;  // sample standard deviation (n - 1)
  std::array<double, 3> quantiles{};  // 0.05, 0.5, 0.95
};

/// Nearest-rank order statistic: element ceil(q * N) - 1 of the sorted values.
double nearest_rank_quantile(std::vector<double> values, double q);
SampleSummary summarize(const std::vector<double>& values);

struct EnsembleReport {
  std::string measure;
  double observed = 0.0;
  double null_mean = 0.0;
  double null_sd = 0.0;
  std::array<double, 3> quantiles{};
  std::vector<double> samples;
  NullKind null_kind = NullKind::label_shuffle;
  std::size_t n_samples = 0;
  std::size_t requested = 0;
  std::vector<std::string> failures;
  std::uint64_t seed = 0;
  DenoiseMode mode = DenoiseMode::subtract;
  double denoised = 0.0;
};

nlohmann::json to_json(const EnsembleReport& report);

struct DenoiseRequest {
  MeasureName measure = MeasureName::dsp;
  MeasureOptions options;
  NullKind null_kind = NullKind::label_shuffle;
  std::size_t n_samples = 100;
  std::uint64_t seed = 0;
  DenoiseMode mode = DenoiseMode::subtract;
  double swaps_per_edge = 10.0;
  std::vector<ColoredGraph> external;  // used when null_kind is external
};

/// Scores the observed graph and each null sample. Sample i is drawn with
/// derive_seed(seed, i, 0) and scored with measure seed derive_seed(seed, i, 1).
/// More than 20% failing samples aborts with NumericalError.
EnsembleReport denoise(const ColoredGraph& graph, const DenoiseRequest& request);

}  // namespace polarimeter
