#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "polarimeter/graph.hpp"

namespace polarimeter {

enum class DanglingPolicy { uniform, source };

std::string to_string(DanglingPolicy policy);
DanglingPolicy parse_dangling_policy(const std::string& text);

struct DiffusionParams {
  double alpha = 0.85;
  double tolerance = 1e-10;
  std::size_t max_iterations = 100000;
  DanglingPolicy dangling = DanglingPolicy::uniform;

  /// Throws InputError when alpha is outside (0, 1), tolerance is not
  /// positive, or max_iterations is zero.
  void validate() const;
};

struct DiffusionVector {
  VertexId source = 0;
  std::vector<double> pi;
  std::vector<double> p_hat;
};

/// One step of the weight-normalized walk: every vertex pushes its mass along
/// out-edges in proportion to weight. Dangling mass goes everywhere evenly, or
/// back to `source` under DanglingPolicy::source (which then needs a source).
std::vector<double> transition_step(const ColoredGraph& graph, std::span<const double> mass,
                                    const DiffusionParams& params,
                                    std::optional<VertexId> source = std::nullopt);

/// Zeroes the source entry and rescales the rest to sum to 1.
std::vector<double> normalize_p_hat(std::span<const double> pi, VertexId source);
void normalize_p_hat_in_place(std::span<double> pi, VertexId source);

DiffusionVector rwr_vector(const ColoredGraph& graph, VertexId source, const DiffusionParams& params);

/// Results ordered as `sources` (default: every vertex in index order).
std::vector<DiffusionVector> all_sources_diffusion(const ColoredGraph& graph, const DiffusionParams& params,
                                                   std::optional<std::span<const VertexId>> sources = std::nullopt);

/// Streams RWR vectors without holding all of them. `sink(source, pi)` is
/// called once per requested source, in the order given, from the calling
/// thread. The span is only valid during the call.
using DiffusionSink = std::function<void(VertexId source, std::span<const double> pi)>;
void stream_diffusions(const ColoredGraph& graph, const DiffusionParams& params,
                       std::span<const VertexId> sources, const DiffusionSink& sink);
void stream_diffusions(const ColoredGraph& graph, const DiffusionParams& params, const DiffusionSink& sink);

/// Number of sources advanced together by the block kernel.
std::size_t diffusion_block_width();
/// 0 restores the default. Results do not depend on this setting.
void set_diffusion_block_width(std::size_t width);

// ---- cache ---------------------------------------------------------------
// One JSON header line, then n rows of n little-endian float64 (pi, source-major).

void save_diffusion_cache(const std::filesystem::path& path, const ColoredGraph& graph,
                          const DiffusionParams& params, std::span<const DiffusionVector> vectors);

/// Returns nothing when the file is missing or keyed to another graph or
/// other parameters. A file whose header matches but whose body is short or
/// corrupt throws InputError.
std::optional<std::vector<DiffusionVector>> load_diffusion_cache(const std::filesystem::path& path,
                                                                 const ColoredGraph& graph,
                                                                 const DiffusionParams& params);

}  // namespace polarimeter
