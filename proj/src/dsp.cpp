#include "polarimeter/dsp.hpp"

#include <algorithm>
#include <cmath>

#include "polarimeter/error.hpp"
#include "polarimeter/random.hpp"

namespace polarimeter {

ExposureAccumulator::ExposureAccumulator(const ColoredGraph& graph)
    : graph_(&graph), k_(graph.color_count()), num_(graph.vertex_count() * graph.color_count()) {
  if (!graph.has_colors()) throw InputError("exposure needs a colored graph");
}

void ExposureAccumulator::add(VertexId source, std::span<const double> p_hat) {
  const std::size_t n = graph_->vertex_count();
  if (source >= n) throw InputError("exposure source out of range");
  if (p_hat.size() != n) throw InputError("p_hat length does not match vertex count");
  const ColorId c = graph_->color(source);
  for (std::size_t v = 0; v < n; ++v) num_[v * k_ + c].add(p_hat[v]);
  ++added_;
}

ExposureProfile ExposureAccumulator::finish(double alpha) const {
  const std::size_t n = graph_->vertex_count();
  ExposureProfile prof;
  prof.vertex_count = n;
  prof.color_count = k_;
  prof.alpha = alpha;
  prof.h.resize(n * k_);
  std::vector<double> row(k_);
  for (std::size_t v = 0; v < n; ++v) {
    double denom = 0.0;
    for (std::size_t c = 0; c < k_; ++c) {
      row[c] = num_[v * k_ + c].value();
      denom += row[c];
    }
    if (!(denom >= 1e-15))
      throw NumericalError("no diffusion mass reaches vertex '" + graph_->vertex_names()[v] + "'");
    for (std::size_t c = 0; c < k_; ++c) prof.h[v * k_ + c] = row[c] / denom;
  }
  std::vector<CompensatedSum> sums(k_ * k_);
  for (std::size_t v = 0; v < n; ++v) {
    const ColorId x = graph_->color(static_cast<VertexId>(v));
    for (std::size_t y = 0; y < k_; ++y) sums[x * k_ + y].add(prof.h[v * k_ + y]);
  }
  prof.sums.resize(k_ * k_);
  for (std::size_t i = 0; i < sums.size(); ++i) prof.sums[i] = sums[i].value();
  return prof;
}

std::string to_string(DspMethod method) {
  switch (method) {
    case DspMethod::exact: return "exact";
    case DspMethod::sampled: return "sampled";
    case DspMethod::probing_oracle: return "probing-oracle";
  }
  return "?";
}

nlohmann::json to_json(const DspResult& r) {
  nlohmann::json j;
  j["measure"] = "dsp";
  j["value"] = r.value;
  j["n"] = r.n;
  j["size_r"] = r.size_r;
  j["size_b"] = r.size_b;
  j["alpha"] = r.alpha;
  j["range_min"] = r.range_min;
  j["range_max"] = r.range_max;
  j["method"] = to_string(r.method);
  j["sample_fraction"] = r.sample_fraction ? nlohmann::json(*r.sample_fraction) : nlohmann::json(nullptr);
  j["seed"] = r.seed ? nlohmann::json(*r.seed) : nlohmann::json(nullptr);
  return j;
}

std::pair<double, double> dsp_range(std::size_t n) {
  if (n < 2) throw InputError("DSP range needs n >= 2");
  const double nd = static_cast<double>(n);
  return {0.5 * (2.0 - nd) / (nd - 1.0), 0.5 * nd / (nd - 1.0)};
}

std::pair<double, double> dsp_range_multicolor(std::span<const std::size_t> color_sizes) {
  std::size_t n = 0;
  for (auto s : color_sizes) n += s;
  if (n < 2 || color_sizes.size() < 2) throw InputError("DSP range needs n >= 2 and two colors");
  const double nd = static_cast<double>(n);
  const double k = static_cast<double>(color_sizes.size());
  double lo = 0.0, hi = 0.0;
  for (auto s : color_sizes) {
    lo -= (static_cast<double>(s) - 1.0) / (nd - 1.0);
    hi += (nd - static_cast<double>(s)) / (nd - 1.0);
  }
  return {lo / k, hi / k};
}

ExposureProfile exposure(const ColoredGraph& graph, std::span<const DiffusionVector> diffusions) {
  ExposureAccumulator acc(graph);
  std::vector<bool> seen(graph.vertex_count(), false);
  for (const auto& dv : diffusions) {
    if (dv.source >= graph.vertex_count() || seen[dv.source]) throw InputError("diffusions must cover each vertex once");
    seen[dv.source] = true;
  }
  if (diffusions.size() != graph.vertex_count()) throw InputError("diffusions must cover all vertices");
  // Ascending source order regardless of how the caller ordered them.
  std::vector<const DiffusionVector*> order(graph.vertex_count());
  for (const auto& dv : diffusions) order[dv.source] = &dv;
  for (const auto* dv : order) acc.add(dv->source, dv->p_hat);
  return acc.finish(0.0);
}

ExposureProfile exposure(const ColoredGraph& graph, const DiffusionParams& params) {
  ExposureAccumulator acc(graph);
  std::vector<double> p_hat(graph.vertex_count());
  stream_diffusions(graph, params, [&](VertexId s, std::span<const double> pi) {
    std::copy(pi.begin(), pi.end(), p_hat.begin());
    normalize_p_hat_in_place(p_hat, s);
    acc.add(s, p_hat);
  });
  return acc.finish(params.alpha);
}

double dsp_value(std::size_t size_r, std::size_t size_b, const ExposureProfile& p) {
  if (p.color_count != 2) throw InputError("two-color DSP needs a two-color profile");
  const double r = static_cast<double>(size_r);
  const double b = static_cast<double>(size_b);
  const double nm1 = r + b - 1.0;
  const double red = (b / nm1) * p.s_rr() - ((r - 1.0) / nm1) * p.s_rb();
  const double blue = (r / nm1) * p.s_bb() - ((b - 1.0) / nm1) * p.s_br();
  return red / (2.0 * r) + blue / (2.0 * b);
}

double dsp_multicolor_value(std::span<const std::size_t> color_sizes, const ExposureProfile& p) {
  const std::size_t k = color_sizes.size();
  if (k != p.color_count || k < 2) throw InputError("color sizes do not match the profile");
  std::size_t n = 0;
  for (auto s : color_sizes) n += s;
  const double nm1 = static_cast<double>(n) - 1.0;
  double total = 0.0;
  for (ColorId q = 0; q < k; ++q) {
    const double sz = static_cast<double>(color_sizes[q]);
    if (color_sizes[q] == 0) continue;
    // Sum over v in Q of h_Q(v) is sums(Q, Q); the count of such v is |Q|.
    const double same = p.sum(q, q);
    const double term = ((static_cast<double>(n) - sz) / nm1) * same - ((sz - 1.0) / nm1) * (sz - same);
    total += term / sz;
  }
  return total / static_cast<double>(k);
}

void require_dsp_input(const ColoredGraph& graph) {
  require_two_colors(graph, "DSP");
  if (graph.vertex_count() < 2) throw InputError("DSP needs n >= 2");
  validate(graph, true);
}

DspResult make_dsp_result(const ColoredGraph& graph, const ExposureProfile& profile, DspMethod method) {
  const Partition part = partition(graph);
  DspResult r;
  r.n = graph.vertex_count();
  r.size_r = part.size_r();
  r.size_b = part.size_b();
  r.alpha = profile.alpha;
  std::tie(r.range_min, r.range_max) = dsp_range(r.n);
  r.method = method;
  r.value = dsp_value(r.size_r, r.size_b, profile);
  return r;
}

DspResult dsp_exact(const ColoredGraph& graph, const DiffusionParams& params) {
  require_dsp_input(graph);
  params.validate();
  return make_dsp_result(graph, exposure(graph, params), DspMethod::exact);
}

DspResult dsp_probing_oracle(const ColoredGraph& graph, const ExposureProfile& profile) {
  require_two_colors(graph, "DSP probing oracle");
  const std::size_t n = graph.vertex_count();
  if (profile.vertex_count != n || profile.color_count != 2) throw InputError("profile does not match graph");
  const Partition part = partition(graph);
  const std::size_t size[2] = {part.size_r(), part.size_b()};
  const double nm1 = static_cast<double>(n) - 1.0;

  // Q_T with probability 1/2, Y uniform in Q_T, then Q_S drawn from the
  // vertices other than Y: Q_S = R with prob |B \ {Y}|/(n-1), the
  // probability that a uniformly drawn other vertex is blue.
  double expectation = 0.0;
  for (ColorId target = 0; target < 2; ++target) {
    double inner = 0.0;
    for (VertexId y = 0; y < n; ++y) {
      if (graph.color(y) != target) continue;
      for (ColorId qs = 0; qs < 2; ++qs) {
        const ColorId other = 1 - qs;
        const double others = static_cast<double>(size[other] - (graph.color(y) == other ? 1 : 0));
        const double prob = others / nm1;
        const double h = profile.h_of(y, qs);
        const double score = graph.color(y) == qs ? h : -h;
        inner += prob * score;
      }
    }
    expectation += 0.5 * inner / static_cast<double>(size[target]);
  }

  DspResult r;
  r.value = expectation;
  r.n = n;
  r.size_r = size[0];
  r.size_b = size[1];
  r.alpha = profile.alpha;
  std::tie(r.range_min, r.range_max) = dsp_range(n);
  r.method = DspMethod::probing_oracle;
  return r;
}

DspResult dsp_multicolor(const ColoredGraph& graph, const DiffusionParams& params) {
  if (!graph.has_colors() || graph.color_count() < 2) throw InputError("multicolor DSP needs at least 2 colors");
  const Partition part = partition(graph);
  for (auto s : part.color_sizes)
    if (s == 0) throw InputError("multicolor DSP: a color class is empty");
  params.validate();
  validate(graph, true);
  const ExposureProfile prof = exposure(graph, params);
  DspResult r;
  r.n = graph.vertex_count();
  r.size_r = part.color_sizes[0];
  r.size_b = part.color_sizes[1];
  r.alpha = params.alpha;
  std::tie(r.range_min, r.range_max) = dsp_range_multicolor(part.color_sizes);
  r.method = DspMethod::exact;
  r.value = dsp_multicolor_value(part.color_sizes, prof);
  return r;
}

std::vector<VertexId> sample_sources(const ColoredGraph& graph, double fraction, std::uint64_t seed,
                                     std::size_t max_retries) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw InputError("sample fraction must lie in (0, 1]");
  const std::size_t n = graph.vertex_count();
  const auto count = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  if (count < 2) throw InputError("sample fraction keeps fewer than 2 vertices");
  Rng rng(seed);
  for (std::size_t attempt = 0; attempt <= max_retries; ++attempt) {
    auto picked = sample_without_replacement(static_cast<std::uint32_t>(n), static_cast<std::uint32_t>(count), rng);
    std::vector<bool> present(graph.color_count(), false);
    for (auto v : picked) present[graph.color(v)] = true;
    if (std::all_of(present.begin(), present.end(), [](bool b) { return b; }))
      return {picked.begin(), picked.end()};
  }
  throw InputError("vertex sample missed a color in " + std::to_string(max_retries + 1) + " draws");
}

DspResult dsp_sampled(const ColoredGraph& graph, const DiffusionParams& params, double sample_fraction,
                      std::uint64_t seed) {
  require_dsp_input(graph);
  params.validate();
  const auto sources = sample_sources(graph, sample_fraction, seed);
  ExposureAccumulator acc(graph);
  std::vector<double> p_hat(graph.vertex_count());
  stream_diffusions(graph, params, sources, [&](VertexId s, std::span<const double> pi) {
    std::copy(pi.begin(), pi.end(), p_hat.begin());
    normalize_p_hat_in_place(p_hat, s);
    acc.add(s, p_hat);
  });
  DspResult r = make_dsp_result(graph, acc.finish(params.alpha), DspMethod::sampled);
  r.sample_fraction = sample_fraction;
  r.seed = seed;
  return r;
}

}  // namespace polarimeter
