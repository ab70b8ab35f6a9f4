#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "polarimeter/error.hpp"
#include "polarimeter/generators.hpp"
#include "polarimeter/random.hpp"
#include "polarimeter/null_models.hpp"
#include "support.hpp"

using namespace polarimeter;

namespace {
std::vector<std::size_t> degrees(const ColoredGraph& g) {
  const auto sk = undirected_skeleton(g);
  std::vector<std::size_t> d(sk.vertex_count());
  for (VertexId v = 0; v < d.size(); ++v) d[v] = sk.degree(v);
  return d;
}
}  // namespace

TEST_CASE("label shuffle keeps structure and counts") {
  const auto g = gen_barbell(10, 2);
  const auto h = shuffle_labels(g, 4);
  CHECK(h.structure_id() == g.structure_id());
  CHECK(partition(h).color_sizes == partition(g).color_sizes);
  CHECK(std::vector<ColorId>(h.colors().begin(), h.colors().end()) !=
        std::vector<ColorId>(g.colors().begin(), g.colors().end()));
  const auto again = shuffle_labels(g, 4);
  CHECK(std::equal(h.colors().begin(), h.colors().end(), again.colors().begin()));
}

TEST_CASE("configuration sample preserves degrees") {
  const auto g = largest_weak_component(gen_sbm(100, 0.12, 0.01, 3));
  const auto h = configuration_sample(g, 10.0, 8);
  CHECK(degrees(h) == degrees(g));
  CHECK(h.edge_count() == g.edge_count());
  std::set<std::pair<VertexId, VertexId>> seen;
  for (const auto& e : h.edges()) {
    CHECK(e.src != e.dst);
    CHECK(h.has_edge(e.dst, e.src));
    seen.insert({e.src, e.dst});
  }
  CHECK(seen.size() == h.edge_count());
  CHECK(h.edges() != g.edges());
  CHECK(std::equal(h.colors().begin(), h.colors().end(), g.colors().begin()));
  CHECK(h.vertex_names() == g.vertex_names());
  CHECK(configuration_sample(g, 10.0, 8).edges() == h.edges());
  CHECK(configuration_sample(g, 0.0, 8).edges() == g.edges());
  CHECK_THROWS_AS(configuration_sample(testing::undirected(2, {{0, 1}}, {0, 1}), 1.0, 1), InputError);
}

TEST_CASE("nearest-rank quantiles and summary") {
  std::vector<double> v;
  for (int i = 20; i >= 1; --i) v.push_back(i);
  CHECK(nearest_rank_quantile(v, 0.05) == 1.0);
  CHECK(nearest_rank_quantile(v, 0.5) == 10.0);
  CHECK(nearest_rank_quantile(v, 0.95) == 19.0);
  const auto s = summarize(v);
  CHECK(s.mean == 10.5);
  CHECK(s.sd == doctest::Approx(std::sqrt(35.0)));
  CHECK(s.quantiles[1] == 10.0);
  CHECK_THROWS_AS(summarize({}), InputError);
}

TEST_CASE("denoise by subtraction") {
  const auto g = gen_barbell(10, 2);
  DenoiseRequest req;
  req.measure = MeasureName::ei;
  req.n_samples = 30;
  req.seed = 5;
  const auto rep = denoise(g, req);
  CHECK(rep.samples.size() == 30);
  CHECK(rep.n_samples == 30);
  CHECK(rep.failures.empty());
  CHECK(rep.observed > 0.9);
  CHECK(std::abs(rep.null_mean) < 0.2);
  CHECK(rep.denoised == doctest::Approx(rep.observed - rep.null_mean));
  // Sample i uses the derived seed.
  const double first = ei(shuffle_labels(g, derive_seed(5, 0, 0))).raw;
  CHECK(rep.samples[0] == first);
  const auto j = to_json(rep);
  CHECK(j["null_kind"] == "label_shuffle");
  CHECK(j["mode"] == "subtract");
}

TEST_CASE("denoise by z-score") {
  const auto g = largest_weak_component(gen_sbm(80, 0.15, 0.02, 4));
  DenoiseRequest req;
  req.measure = MeasureName::q;
  req.null_kind = NullKind::configuration;
  req.mode = DenoiseMode::zscore;
  req.n_samples = 20;
  const auto rep = denoise(g, req);
  CHECK(rep.denoised == doctest::Approx((rep.observed - rep.null_mean) / rep.null_sd));
  CHECK(rep.denoised > 3.0);

  // Configuration samples of a clique are the clique: zero spread.
  req.measure = MeasureName::ei;
  CHECK_THROWS_AS(denoise(gen_clique(5, 5), req), NumericalError);
}

TEST_CASE("external samples") {
  testing::TempDir tmp("external");
  const auto g = gen_barbell(4, 2);
  for (int i = 0; i < 3; ++i) {
    const auto s = shuffle_labels(g, i);
    save_edge_list(s, tmp.file("s" + std::to_string(i) + ".edges"));
    save_labels(s, tmp.file("s" + std::to_string(i) + ".labels"));
  }
  const auto samples = load_external_samples(tmp.path(), g);
  CHECK(samples.size() == 3);
  DenoiseRequest req;
  req.measure = MeasureName::ei;
  req.null_kind = NullKind::external;
  req.external = samples;
  CHECK(denoise(g, req).n_samples == 3);

  tmp.write("orphan.edges", "0\t1\n");
  CHECK_THROWS_AS(load_external_samples(tmp.path(), g), InputError);
  CHECK_THROWS_AS(load_external_samples(tmp.path() / "none", g), InputError);
}

TEST_CASE("external samples must name the same vertices") {
  testing::TempDir tmp("external-names");
  const auto g = gen_barbell(4, 2);
  tmp.write("x.edges", "a\tb\n");
  tmp.write("x.labels", "a\tred\nb\tblue\n");
  CHECK_THROWS_AS(load_external_samples(tmp.path(), g), InputError);
}
