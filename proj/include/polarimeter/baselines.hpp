#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarimeter/diffusion.hpp"
#include "polarimeter/graph.hpp"

namespace polarimeter {

enum class MeasureName { rwc, arwc, ei, aei, q, col_ass, bp, bcc, dm, cca, dsp };

std::string to_string(MeasureName name);
MeasureName parse_measure_name(const std::string& text);
/// All eleven measures, DSP last.
const std::vector<MeasureName>& all_measures();

struct MeasureResult {
  MeasureName name = MeasureName::dsp;
  double raw = 0.0;
  double rescaled = 0.0;
  nlohmann::json params = nlohmann::json::object();
  std::optional<std::uint64_t> seed;
};

nlohmann::json to_json(const MeasureResult& result);

enum class InfluencerCount { fixed, fraction };

struct InfluencerConfig {
  InfluencerCount mode = InfluencerCount::fixed;
  std::size_t k = 10;
  double fraction = 0.10;
  bool exclude_from_restart = false;

  void validate() const;
  /// Influencers for a side of the given size (never more than the side).
  std::size_t count_for(std::size_t side_size) const;
  nlohmann::json to_json() const;
};

/// Highest unweighted in-degree vertices of one color, ties to the smaller index.
std::vector<VertexId> top_influencers(const ColoredGraph& graph, ColorId color, std::size_t k);

MeasureResult rwc(const ColoredGraph& graph, const DiffusionParams& params, const InfluencerConfig& cfg,
                  std::size_t walks, std::uint64_t seed);
MeasureResult arwc(const ColoredGraph& graph, const DiffusionParams& params, double fraction, std::size_t walks,
                   std::uint64_t seed, bool exclude_from_restart = false);
MeasureResult ei(const ColoredGraph& graph);
MeasureResult aei(const ColoredGraph& graph);
MeasureResult modularity_q(const ColoredGraph& graph);
MeasureResult color_assortativity(const ColoredGraph& graph);
MeasureResult boundary_polarization(const ColoredGraph& graph);
MeasureResult bcc(const ColoredGraph& graph, std::size_t bins = 512, bool weights_as_distances = false);
MeasureResult dipole_moment(const ColoredGraph& graph, const InfluencerConfig& cfg);
MeasureResult cca(const ColoredGraph& graph, double alpha_hop = 0.5);

/// Edge betweenness of the undirected skeleton, aligned with its
/// neighbor slots (both slots of an edge hold the same value).
std::vector<double> edge_betweenness(const UndirectedSkeleton& skeleton, bool weights_as_distances);

/// Everything needed to run any measure by name.
struct MeasureOptions {
  DiffusionParams diffusion;
  InfluencerConfig influencers;                 // rwc
  double arwc_fraction = 0.10;                  // arwc; exclusion follows influencers
  InfluencerConfig dm_influencers{InfluencerCount::fraction, 10, 0.10, false};
  std::size_t walks = 10000;
  std::uint64_t seed = 0;
  std::optional<double> sample_fraction;        // dsp
  std::size_t bcc_bins = 512;
  bool bcc_weights_as_distances = false;
  double cca_alpha_hop = 0.5;
};

MeasureResult score_measure(MeasureName name, const ColoredGraph& graph, const MeasureOptions& options);

}  // namespace polarimeter
