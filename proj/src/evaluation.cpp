#include "polarimeter/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "polarimeter/dsp.hpp"
#include "polarimeter/error.hpp"
#include "polarimeter/parallel.hpp"
#include "polarimeter/random.hpp"

namespace polarimeter {

RescaleRule rescale_rule(MeasureName measure, std::size_t n) {
  const std::string name = to_string(measure);
  switch (measure) {
    case MeasureName::rwc:
    case MeasureName::arwc:
    case MeasureName::ei:
    case MeasureName::aei:
    case MeasureName::col_ass: return {name, -1.0, 1.0, RescaleMode::signed_preserve_zero};
    case MeasureName::bp: return {name, -0.5, 0.5, RescaleMode::signed_preserve_zero};
    case MeasureName::cca: return {name, -1.5, 1.5, RescaleMode::signed_preserve_zero};
    case MeasureName::q: return {name, -0.5, 1.0, RescaleMode::signed_preserve_zero};
    case MeasureName::bcc:
    case MeasureName::dm: return {name, 0.0, 1.0, RescaleMode::magnitude};
    case MeasureName::dsp: {
      const auto [lo, hi] = dsp_range(n);
      return {name, lo, hi, RescaleMode::signed_preserve_zero};
    }
  }
  throw InputError("no rescale rule for measure");
}

double rescale(double raw, const RescaleRule& rule, std::string* warning) {
  if (!(rule.range_min < rule.range_max)) throw InputError("rescale rule for " + rule.measure + " has an empty range");
  if (rule.mode == RescaleMode::signed_preserve_zero && !(rule.range_min <= 0.0 && rule.range_max > 0.0))
    throw InputError("signed rescale rule for " + rule.measure + " must straddle 0");
  if (!std::isfinite(raw)) throw InputError("cannot rescale a non-finite " + rule.measure + " value");
  constexpr double kSlack = 1e-9;
  if (raw < rule.range_min - kSlack || raw > rule.range_max + kSlack) {
    std::ostringstream msg;
    msg.precision(17);
    msg << rule.measure << " value " << raw << " lies outside [" << rule.range_min << ", " << rule.range_max << "]";
    throw InputError(msg.str());
  }
  if (raw < rule.range_min || raw > rule.range_max) {
    if (warning) *warning = rule.measure + " value clamped into its range";
    raw = std::clamp(raw, rule.range_min, rule.range_max);
  }
  if (rule.mode == RescaleMode::magnitude) return (raw - rule.range_min) / (rule.range_max - rule.range_min);
  // A zero lower end (DSP at n = 2) leaves no negative branch after clamping.
  if (raw < 0.0) return raw / -rule.range_min;
  return raw / rule.range_max;
}

std::string to_string(ScoreClass c) { return c == ScoreClass::polarized ? "polarized" : "nonpolarized"; }

ScoreClass parse_score_class(const std::string& text) {
  if (text == "polarized") return ScoreClass::polarized;
  if (text == "nonpolarized") return ScoreClass::nonpolarized;
  throw InputError("unknown class '" + text + "' (expected polarized or nonpolarized)");
}

RocResult roc_auc(std::span<const LabeledScore> scores) {
  std::size_t pos = 0, neg = 0;
  for (const auto& s : scores) {
    if (!std::isfinite(s.score)) throw InputError("ROC score for '" + s.name + "' is not finite");
    (s.label == ScoreClass::polarized ? pos : neg) += 1;
  }
  if (pos == 0 || neg == 0) throw InputError("ROC needs at least one item of each class");

  std::vector<const LabeledScore*> order;
  for (const auto& s : scores) order.push_back(&s);
  std::stable_sort(order.begin(), order.end(), [](auto* a, auto* b) { return a->score > b->score; });

  RocResult result;
  result.curve.push_back({std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    const double t = order[i]->score;
    while (i < order.size() && order[i]->score == t) {
      (order[i]->label == ScoreClass::polarized ? tp : fp) += 1;
      ++i;
    }
    result.curve.push_back({t, static_cast<double>(fp) / static_cast<double>(neg),
                            static_cast<double>(tp) / static_cast<double>(pos)});
  }
  for (std::size_t i = 1; i < result.curve.size(); ++i) {
    const auto& a = result.curve[i - 1];
    const auto& b = result.curve[i];
    result.auc += (b.fpr - a.fpr) * (a.tpr + b.tpr) / 2.0;
  }
  return result;
}

ApproximationReport approximation_report(const ColoredGraph& graph, const DiffusionParams& params,
                                         std::span<const double> fractions, std::size_t seeds_per_fraction,
                                         std::uint64_t master_seed) {
  require_dsp_input(graph);
  params.validate();
  if (seeds_per_fraction == 0) throw InputError("approximation report needs at least one seed per fraction");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0)) throw InputError("sample fractions must lie in (0, 1]");

  // Every p-hat row once; each (fraction, seed) cell then reuses them.
  const std::size_t n = graph.vertex_count();
  std::vector<double> table(n * n);
  stream_diffusions(graph, params, [&](VertexId s, std::span<const double> pi) {
    std::span<double> row(table.data() + static_cast<std::size_t>(s) * n, n);
    std::copy(pi.begin(), pi.end(), row.begin());
    normalize_p_hat_in_place(row, s);
  });
  auto estimate = [&](std::span<const VertexId> sources) {
    ExposureAccumulator acc(graph);
    for (VertexId s : sources) acc.add(s, std::span<const double>(table.data() + static_cast<std::size_t>(s) * n, n));
    return make_dsp_result(graph, acc.finish(params.alpha), DspMethod::sampled).value;
  };

  ApproximationReport report;
  {
    std::vector<VertexId> all(n);
    for (VertexId v = 0; v < n; ++v) all[v] = v;
    report.exact = estimate(all);
  }
  const std::size_t cells = fractions.size() * seeds_per_fraction;
  std::vector<double> values(cells);
  parallel_for(cells, [&](std::size_t cell) {
    const double f = fractions[cell / seeds_per_fraction];
    const std::uint64_t seed = derive_seed(master_seed, cell % seeds_per_fraction);
    values[cell] = estimate(sample_sources(graph, f, seed));
  });

  for (std::size_t i = 0; i < fractions.size(); ++i) {
    ApproximationRow row;
    row.fraction = fractions[i];
    row.n_seeds = seeds_per_fraction;
    row.estimates.assign(values.begin() + static_cast<std::ptrdiff_t>(i * seeds_per_fraction),
                         values.begin() + static_cast<std::ptrdiff_t>((i + 1) * seeds_per_fraction));
    double abs_err = 0.0, mean = 0.0;
    for (double e : row.estimates) {
      abs_err += std::fabs(e - report.exact);
      mean += e;
    }
    const double k = static_cast<double>(row.n_seeds);
    row.mae = abs_err / k;
    mean /= k;
    double ss = 0.0;
    for (double e : row.estimates) ss += (e - mean) * (e - mean);
    const auto [lo, hi] = std::minmax_element(row.estimates.begin(), row.estimates.end());
    row.sd = row.n_seeds > 1 && *lo != *hi ? std::sqrt(ss / (k - 1.0)) : 0.0;
    report.rows.push_back(std::move(row));
  }
  return report;
}

}  // namespace polarimeter
