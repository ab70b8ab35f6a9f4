#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "polarimeter/baselines.hpp"
#include "polarimeter/diffusion.hpp"
#include "polarimeter/graph.hpp"

namespace polarimeter {

enum class RescaleMode { signed_preserve_zero, magnitude };

struct RescaleRule {
  std::string measure;
  double range_min = -1.0;
  double range_max = 1.0;
  RescaleMode mode = RescaleMode::signed_preserve_zero;
};

/// Native range of each measure. DSP's range depends on n.
RescaleRule rescale_rule(MeasureName measure, std::size_t n = 0);

/// Signed rules map [min, 0] onto [-1, 0] and [0, max] onto [0, 1];
/// magnitude rules map [min, max] onto [0, 1]. Values within 1e-9 outside
/// the range are clamped (and `warning`, when given, is set); anything
/// further out throws InputError.
double rescale(double raw, const RescaleRule& rule, std::string* warning = nullptr);

enum class ScoreClass { polarized, nonpolarized };
std::string to_string(ScoreClass c);
ScoreClass parse_score_class(const std::string& text);

struct LabeledScore {
  std::string name;
  double score = 0.0;
  ScoreClass label = ScoreClass::nonpolarized;
};

struct RocPoint {
  double threshold = 0.0;  // +inf for the first point
  double fpr = 0.0;
  double tpr = 0.0;
};

struct RocResult {
  std::vector<RocPoint> curve;
  double auc = 0.0;
};

/// Sweeps thresholds over the distinct scores from high to low; scores at or
/// above the threshold are called polarized. Tied scores enter together.
RocResult roc_auc(std::span<const LabeledScore> scores);

struct ApproximationRow {
  double fraction = 0.0;
  double mae = 0.0;
  double sd = 0.0;
  std::size_t n_seeds = 0;
  std::vector<double> estimates;
};

struct ApproximationReport {
  double exact = 0.0;
  std::vector<ApproximationRow> rows;
};

/// Sampled DSP against the exact value. Seed j of every fraction is
/// derive_seed(master_seed, j), and each estimate equals
/// dsp_sampled(graph, params, fraction, that seed) bit for bit.
ApproximationReport approximation_report(const ColoredGraph& graph, const DiffusionParams& params,
                                         std::span<const double> fractions, std::size_t seeds_per_fraction,
                                         std::uint64_t master_seed);

}  // namespace polarimeter
