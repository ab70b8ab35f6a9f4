#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "polarimeter/diffusion.hpp"
#include "polarimeter/graph.hpp"

namespace polarimeter {

/// Neumaier-compensated running sum.
class CompensatedSum {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) comp_ += (sum_ - t) + x;
    else comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct ExposureProfile {
  std::size_t vertex_count = 0;
  std::size_t color_count = 0;
  double alpha = 0.0;
  /// h[v * color_count + c] = share of the diffusion mass reaching v that
  /// started in color c.
  std::vector<double> h;
  /// sums[x * color_count + y] = sum over v of color x of h_y(v).
  std::vector<double> sums;

  double h_of(VertexId v, ColorId c) const { return h[v * color_count + c]; }
  double sum(ColorId x, ColorId y) const { return sums[x * color_count + y]; }
  double s_rr() const { return sum(0, 0); }
  double s_rb() const { return sum(0, 1); }
  double s_bb() const { return sum(1, 1); }
  double s_br() const { return sum(1, 0); }
};

/// Builds an exposure profile from p-hat vectors fed one source at a time.
/// Feeding sources in ascending order makes the result independent of how
/// the vectors were produced.
class ExposureAccumulator {
 public:
  explicit ExposureAccumulator(const ColoredGraph& graph);

  void add(VertexId source, std::span<const double> p_hat);
  std::size_t sources_added() const { return added_; }

  /// Throws NumericalError when some vertex received (almost) no mass.
  ExposureProfile finish(double alpha) const;

 private:
  const ColoredGraph* graph_;
  std::size_t k_;
  std::vector<CompensatedSum> num_;
  std::size_t added_ = 0;
};

enum class DspMethod { exact, sampled, probing_oracle };
std::string to_string(DspMethod method);

struct DspResult {
  double value = 0.0;
  std::size_t n = 0;
  std::size_t size_r = 0;
  std::size_t size_b = 0;
  double alpha = 0.0;
  double range_min = 0.0;
  double range_max = 0.0;
  DspMethod method = DspMethod::exact;
  std::optional<double> sample_fraction;
  std::optional<std::uint64_t> seed;
};

nlohmann::json to_json(const DspResult& result);

std::pair<double, double> dsp_range(std::size_t n);
/// Bounds of the k-color value for the given color sizes.
std::pair<double, double> dsp_range_multicolor(std::span<const std::size_t> color_sizes);

ExposureProfile exposure(const ColoredGraph& graph, std::span<const DiffusionVector> diffusions);
/// Streams all sources; does not keep the diffusion vectors.
ExposureProfile exposure(const ColoredGraph& graph, const DiffusionParams& params);

/// The four-sum closed form on a two-color profile.
double dsp_value(std::size_t size_r, std::size_t size_b, const ExposureProfile& profile);
/// The k-color expectation on any profile.
double dsp_multicolor_value(std::span<const std::size_t> color_sizes, const ExposureProfile& profile);

DspResult dsp_exact(const ColoredGraph& graph, const DiffusionParams& params);
DspResult dsp_probing_oracle(const ColoredGraph& graph, const ExposureProfile& profile);
DspResult dsp_multicolor(const ColoredGraph& graph, const DiffusionParams& params);

/// Sorted uniform sample of ceil(fraction * n) sources that holds every
/// color, redrawn up to `max_retries` times.
std::vector<VertexId> sample_sources(const ColoredGraph& graph, double fraction, std::uint64_t seed,
                                     std::size_t max_retries = 100);

DspResult dsp_sampled(const ColoredGraph& graph, const DiffusionParams& params, double sample_fraction,
                      std::uint64_t seed);

/// Shared result packaging for exact and sampled runs.
DspResult make_dsp_result(const ColoredGraph& graph, const ExposureProfile& profile, DspMethod method);

/// Precondition check for DSP: two non-empty colors, n >= 2, weakly connected.
void require_dsp_input(const ColoredGraph& graph);

}  // namespace polarimeter
