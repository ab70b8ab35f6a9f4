#include <doctest.h>

#include <cmath>

#include "polarimeter/diffusion.hpp"
#include "polarimeter/dsp.hpp"
#include "polarimeter/error.hpp"
#include "polarimeter/generators.hpp"
#include "support.hpp"

using namespace polarimeter;

namespace {
DiffusionParams alpha(double a) {
  DiffusionParams p;
  p.alpha = a;
  return p;
}

// Enumerates the k-color probing process on a clique, where exposure is known
// from counts alone: h_c(v) = (|c| - [c == color(v)]) / (n - 1).
double clique_multicolor_brute(const std::vector<ColorId>& colors, std::size_t k) {
  const std::size_t n = colors.size();
  std::vector<double> size(k, 0.0);
  for (auto c : colors) size[c] += 1.0;
  const double m = static_cast<double>(n - 1);
  double total = 0.0;
  for (ColorId qt = 0; qt < k; ++qt) {
    for (std::size_t y = 0; y < n; ++y) {
      if (colors[y] != qt) continue;
      const double h_own = (size[qt] - 1.0) / m;
      const double p_same = (static_cast<double>(n) - size[qt]) / m;
      const double p_rest = (size[qt] - 1.0) / m;
      total += (1.0 / static_cast<double>(k)) * (1.0 / size[qt]) * (p_same * h_own - p_rest * (1.0 - h_own));
    }
  }
  return total;
}
}  // namespace

TEST_CASE("compensated sum") {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 10; ++i) s.add(1e-16);
  CHECK(s.value() == 1.0 + 1e-15);
}

TEST_CASE("range formula") {
  auto [lo, hi] = dsp_range(100);
  CHECK(lo == doctest::Approx(-(49.0 / 99.0)));
  CHECK(hi == doctest::Approx(50.0 / 99.0));
  auto [lo2, hi2] = dsp_range(2);
  CHECK(lo2 == 0.0);
  CHECK_FALSE(std::signbit(lo2));
  CHECK(hi2 == 1.0);
  const std::vector<std::size_t> sizes{4, 4, 4};
  auto [klo, khi] = dsp_range_multicolor(sizes);
  CHECK(klo == doctest::Approx(-3.0 / 11.0));
  CHECK(khi == doctest::Approx(8.0 / 11.0));
}

TEST_CASE("clique exposure closed form") {
  auto g = gen_clique(6, 4);
  const auto prof = exposure(g, DiffusionParams{});
  for (VertexId v = 0; v < 10; ++v) {
    const double same = g.color(v) == 0 ? 5.0 / 9.0 : 3.0 / 9.0;
    const double other = g.color(v) == 0 ? 4.0 / 9.0 : 6.0 / 9.0;
    CHECK(prof.h_of(v, g.color(v)) == doctest::Approx(same).epsilon(1e-12));
    CHECK(prof.h_of(v, 1 - g.color(v)) == doctest::Approx(other).epsilon(1e-12));
  }
  CHECK(prof.s_rr() + prof.s_rb() == doctest::Approx(6.0).epsilon(1e-12));
  CHECK(prof.s_br() + prof.s_bb() == doctest::Approx(4.0).epsilon(1e-12));
}

TEST_CASE("clique scores zero for any split") {
  for (auto [r, b] : {std::pair<std::size_t, std::size_t>{20, 20}, {36, 4}}) {
    const auto res = dsp_exact(gen_clique(r, b), DiffusionParams{});
    CHECK(std::abs(res.value) < 1e-9);
    CHECK(res.size_r == r);
    CHECK(res.method == DspMethod::exact);
  }
}

TEST_CASE("two-vertex graph") {
  auto g = testing::undirected(2, {{0, 1}}, {0, 1});
  const auto prof = exposure(g, DiffusionParams{});
  CHECK(prof.h_of(0, 0) == 0.0);
  CHECK(prof.h_of(0, 1) == 1.0);
  CHECK(std::abs(dsp_exact(g, DiffusionParams{}).value) < 1e-12);
}

TEST_CASE("alternating cycle matches dense solve") {
  // Frozen from an independent dense linear solve of the RWR system.
  const double oracle = -0.13732319431236975;
  const auto res = dsp_exact(gen_alternating_cycle(100), alpha(0.85));
  CHECK(res.value == doctest::Approx(oracle).epsilon(1e-9));
  const auto prof = exposure(gen_alternating_cycle(100), alpha(0.85));
  for (VertexId v = 1; v < 100; ++v) CHECK(prof.h_of(v, v % 2) == doctest::Approx(prof.h_of(0, 0)).epsilon(1e-10));
  CHECK(res.value == doctest::Approx(prof.h_of(0, 0) - 0.5 * 98.0 / 99.0).epsilon(1e-10));
}

TEST_CASE("half-split cycle closed form") {
  auto g = gen_half_split_cycle(10, 10);
  const auto prof = exposure(g, DiffusionParams{});
  const double expected = (2.0 / 20.0) * prof.s_rr() - 0.5 * 18.0 / 19.0;
  CHECK(dsp_exact(g, DiffusionParams{}).value == doctest::Approx(expected).epsilon(1e-12));
  CHECK(dsp_probing_oracle(g, prof).value == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("barbell is close to the top of the range") {
  const auto res = dsp_exact(gen_barbell(30, 2), alpha(0.85));
  CHECK(res.value > 0.9 * res.range_max);
  CHECK(res.value <= res.range_max);
}

TEST_CASE("probing oracle agrees with the closed form") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    auto g = largest_weak_component(gen_sbm(80, 0.15, 0.03, seed));
    const auto prof = exposure(g, DiffusionParams{});
    const double closed = make_dsp_result(g, prof, DspMethod::exact).value;
    const auto oracle = dsp_probing_oracle(g, prof);
    CHECK(oracle.method == DspMethod::probing_oracle);
    CHECK(std::abs(oracle.value - closed) < 1e-12);
  }
}

TEST_CASE("streaming and stored diffusions agree") {
  auto g = gen_barbell(6, 4, 2);
  const auto all = all_sources_diffusion(g, DiffusionParams{});
  const auto a = exposure(g, all);
  const auto b = exposure(g, DiffusionParams{});
  CHECK(a.h == b.h);
  CHECK(a.sums == b.sums);
}

TEST_CASE("accumulator refuses starved vertices") {
  auto g = gen_clique(2, 2);
  ExposureAccumulator acc(g);
  const std::vector<double> p{0.0, 1.0, 0.0, 0.0};
  acc.add(0, p);
  CHECK(acc.sources_added() == 1);
  CHECK_THROWS_AS(acc.finish(0.85), NumericalError);
}

TEST_CASE("multicolor clique") {
  std::vector<ColorId> colors(12);
  for (VertexId v = 0; v < 12; ++v) colors[v] = v % 3;
  auto g = gen_clique(6, 6).recolored(colors, {"a", "b", "c"});
  const auto res = dsp_multicolor(g, DiffusionParams{});
  CHECK(std::abs(clique_multicolor_brute(colors, 3)) < 1e-15);
  CHECK(std::abs(res.value - clique_multicolor_brute(colors, 3)) < 1e-12);
  // Two colors reduce to the two-color value.
  auto bar = gen_barbell(5, 2);
  CHECK(dsp_multicolor(bar, DiffusionParams{}).value == doctest::Approx(dsp_exact(bar, DiffusionParams{}).value).epsilon(1e-12));
}

TEST_CASE("source sampling") {
  auto g = gen_barbell(10, 2);
  const auto s = sample_sources(g, 0.25, 3);
  CHECK(s.size() == 6);
  CHECK(std::is_sorted(s.begin(), s.end()));
  bool red = false, blue = false;
  for (auto v : s) (g.color(v) == 0 ? red : blue) = true;
  CHECK((red && blue));
  CHECK(sample_sources(g, 0.25, 3) == s);
  CHECK_THROWS_AS(sample_sources(g, 0.0, 1), InputError);
}

TEST_CASE("sampled estimate") {
  auto g = largest_weak_component(gen_sbm(200, 0.1, 0.01, 9));
  const auto exact = dsp_exact(g, DiffusionParams{});
  const auto full = dsp_sampled(g, DiffusionParams{}, 1.0, 77);
  CHECK(full.value == exact.value);
  const auto part = dsp_sampled(g, DiffusionParams{}, 0.3, 77);
  CHECK(part.method == DspMethod::sampled);
  CHECK(*part.sample_fraction == 0.3);
  CHECK(*part.seed == 77);
  CHECK(std::abs(part.value - exact.value) < 0.1);
  CHECK(dsp_sampled(g, DiffusionParams{}, 0.3, 77).value == part.value);
}

TEST_CASE("sampled estimate on a clique follows the sample counts") {
  // With uniform p-hat, h_c(v) is the share of color c among sampled sources
  // other than v. Eq. 4 is then evaluated with the population constants.
  const auto g = gen_clique(15, 5);
  const auto src = sample_sources(g, 0.2, 1);
  std::vector<char> in(20, 0);
  double s_count[2] = {0, 0};
  for (auto v : src) {
    in[v] = 1;
    s_count[g.color(v)] += 1;
  }
  double sums[2][2] = {{0, 0}, {0, 0}};
  for (VertexId v = 0; v < 20; ++v) {
    const ColorId c = g.color(v);
    const double total = static_cast<double>(src.size()) - in[v];
    for (ColorId y = 0; y < 2; ++y) sums[c][y] += (s_count[y] - (in[v] && y == c ? 1 : 0)) / total;
  }
  const double r = 15, b = 5, n = 20;
  const double expected = (1 / (2 * r)) * ((b / (n - 1)) * sums[0][0] - ((r - 1) / (n - 1)) * sums[0][1]) +
                          (1 / (2 * b)) * ((r / (n - 1)) * sums[1][1] - ((b - 1) / (n - 1)) * sums[1][0]);
  CHECK(dsp_sampled(g, DiffusionParams{}, 0.2, 1).value == doctest::Approx(expected).epsilon(1e-9));
  CHECK(std::abs(dsp_sampled(g, DiffusionParams{}, 1.0, 1).value) < 1e-12);
}

TEST_CASE("input checks") {
  auto disconnected = testing::undirected(4, {{0, 1}, {2, 3}}, {0, 1, 0, 1});
  CHECK_THROWS_AS(dsp_exact(disconnected, DiffusionParams{}), InputError);
  auto mono = gen_clique(3, 3).recolored({0, 0, 0, 0, 0, 0}, {"red", "blue"});
  CHECK_THROWS_AS(dsp_exact(mono, DiffusionParams{}), InputError);
  CHECK_THROWS_AS(dsp_exact(gen_clique(3, 3), alpha(1.0)), InputError);
}

TEST_CASE("result json fields") {
  const auto res = dsp_sampled(gen_barbell(5, 2), DiffusionParams{}, 0.5, 4);
  const auto j = to_json(res);
  for (const char* key : {"value", "n", "size_r", "size_b", "alpha", "range_min", "range_max", "method",
                          "sample_fraction", "seed"})
    CHECK(j.contains(key));
  CHECK(j["method"] == "sampled");
  CHECK(to_json(dsp_exact(gen_barbell(5, 2), DiffusionParams{}))["seed"].is_null());
}
