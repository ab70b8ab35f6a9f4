#include <doctest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"
#include "polarimeter/generators.hpp"
#include "polarimeter/parallel.hpp"
#include "support.hpp"

using namespace polarimeter;
using nlohmann::json;

namespace {
struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

struct Fixture {
  testing::TempDir tmp{"cli"};
  std::string edges, labels;
  Fixture() {
    const auto g = gen_barbell(6, 2);
    edges = tmp.file("g.edges");
    labels = tmp.file("g.labels");
    save_edge_list(g, edges);
    save_labels(g, labels);
  }
};
}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run({"--help"}).code == 0);
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"score", "--edges", "x"}).code == 2);
  const auto v = run({"--version"});
  CHECK(v.code == 0);
  CHECK(v.out.find("polarimeter") != std::string::npos);
}

TEST_CASE("generate writes edges and labels") {
  testing::TempDir tmp("cli-gen");
  const auto r = run({"generate", "gnpl", "--n", "100", "--d", "5", "--red-frac", "0.7", "--seed", "3", "--policy",
                      "lwcc", "--out", tmp.file("g")});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["provenance"]["config"]["generator"]["seed"] == 3);
  const auto g = load_colored_graph(tmp.file("g.edges"), tmp.file("g.labels"));
  CHECK(g.vertex_count() == j["n"].get<std::size_t>());
  CHECK(run({"generate", "gnpl", "--n", "100", "--out", tmp.file("h")}).code == 2);
  CHECK(run({"generate", "barbell", "--clique", "5", "--path", "3", "--out", tmp.file("b")}).code == 2);
  CHECK(run({"generate", "torus", "--out", tmp.file("t")}).code == 2);
}

TEST_CASE("score emits one entry per measure") {
  Fixture f;
  const auto r = run({"score", "--edges", f.edges, "--labels", f.labels, "--measure", "ei,dsp", "--seed", "4"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  REQUIRE(j.size() == 2);
  CHECK(j[0]["measure"] == "ei");
  CHECK(j[1]["measure"] == "dsp");
  CHECK(j[1]["params"]["result"]["n"] == 14);
  CHECK(j[1]["provenance"]["tool"] == "polarimeter");
  CHECK(j[1]["provenance"]["config"]["options"]["seed"] == 4);

  const auto all = json::parse(run({"score", "--edges", f.edges, "--labels", f.labels, "--walks", "500"}).out);
  CHECK(all.size() == 11);
}

TEST_CASE("score csv") {
  Fixture f;
  const auto r = run({"score", "--edges", f.edges, "--labels", f.labels, "--measure", "q", "--format", "csv"});
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::string first, header, row;
  std::getline(lines, first);
  std::getline(lines, header);
  std::getline(lines, row);
  CHECK(first.rfind("# {", 0) == 0);
  CHECK(header == "measure,raw,rescaled,seed,error");
  CHECK(row.rfind("q,", 0) == 0);
}

TEST_CASE("score validation and numerical failures") {
  Fixture f;
  CHECK(run({"score", "--edges", f.edges, "--labels", f.labels, "--alpha", "1"}).code == 2);
  CHECK(run({"score", "--edges", f.edges, "--labels", f.labels, "--measure", "gini"}).code == 2);
  CHECK(run({"score", "--edges", f.edges, "--labels", f.labels, "--influencers", "3", "--influencer-frac", "0.1"}).code == 2);
  CHECK(run({"score", "--edges", f.tmp.file("missing"), "--labels", f.labels}).code == 2);
  CHECK(run({"score", "--edges", f.edges, "--labels", f.labels, "--format", "xml"}).code == 2);

  const auto bad = run({"score", "--edges", f.edges, "--labels", f.labels, "--measure", "dsp,ei", "--max-iter", "2"});
  CHECK(bad.code == 3);
  const auto j = json::parse(bad.out);
  CHECK(j[0]["error"]["kind"] == "numerical");
  CHECK(j[1]["raw"].is_number());

  const auto lab = f.tmp.write("bad.labels", "0\tred\n");
  const auto partial = run({"score", "--edges", f.edges, "--labels", lab});
  CHECK(partial.code == 2);
  CHECK(partial.err.find("missing label") != std::string::npos);
}

TEST_CASE("out flag writes a file") {
  Fixture f;
  const auto path = f.tmp.file("out.json");
  const auto r = run({"score", "--edges", f.edges, "--labels", f.labels, "--measure", "ei", "--out", path});
  CHECK(r.code == 0);
  CHECK(r.out.empty());
  CHECK(json::parse(testing::slurp(path))[0]["measure"] == "ei");
}

TEST_CASE("ensemble summaries") {
  const std::vector<std::string> args{"ensemble", "sbm", "--n", "60", "--p", "0.3", "--q", "0.02", "--policy", "lwcc",
                                      "--samples", "5", "--measure", "ei,dsp", "--seed", "2"};
  const auto r = run(args);
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  REQUIRE(j["reports"].size() == 2);
  CHECK(j["reports"][0]["samples"].size() == 5);
  CHECK(j["reports"][1]["mean"].get<double>() > 0.1);
  set_max_threads(3);
  CHECK(run(args).out == r.out);
  set_max_threads(0);

  auto csv_args = args;
  csv_args.insert(csv_args.end(), {"--format", "csv"});
  const auto csv = run(csv_args);
  CHECK(csv.out.find("measure,stat,value\nei,mean,") != std::string::npos);
  CHECK(run({"ensemble", "sbm", "--n", "60", "--p", "0.3", "--samples", "0"}).code == 2);
}

TEST_CASE("denoise command") {
  Fixture f;
  const auto r = run({"denoise", "--edges", f.edges, "--labels", f.labels, "--measure", "ei", "--samples", "10", "--seed",
                      "1", "--mode", "subtract"});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["n_samples"] == 10);
  CHECK(j["provenance"]["config"]["null"] == "shuffle");
  CHECK(run({"denoise", "--edges", f.edges, "--labels", f.labels, "--measure", "ei,q"}).code == 2);
  CHECK(run({"denoise", "--edges", f.edges, "--labels", f.labels, "--null", "rewire"}).code == 2);
  CHECK(run({"denoise", "--edges", f.edges, "--labels", f.labels, "--null", "external:" + f.tmp.file("none")}).code == 2);
}

TEST_CASE("roc over a manifest") {
  testing::TempDir tmp("cli-roc");
  std::string manifest = "edges,labels,class\n";
  auto add = [&](const std::string& stem, const ColoredGraph& g, const char* cls) {
    save_edge_list(g, tmp.file(stem + ".edges"));
    save_labels(g, tmp.file(stem + ".labels"));
    manifest += stem + ".edges," + stem + ".labels," + cls + "\n";
  };
  add("b1", gen_barbell(6, 2), "polarized");
  add("b2", gen_barbell(8, 4), "polarized");
  add("c1", gen_clique(5, 5), "nonpolarized");
  add("a1", gen_alternating_cycle(10), "nonpolarized");
  const auto path = tmp.write("m.csv", manifest);

  const auto r = run({"roc", "--manifest", path});
  REQUIRE(r.code == 0);
  const auto j = json::parse(r.out);
  CHECK(j["auc"] == 1.0);
  CHECK(j["curve"][0]["threshold"].is_null());
  CHECK(j["items"].size() == 4);

  const auto csv_path = tmp.file("roc.csv");
  const auto w = run({"roc", "--manifest", path, "--measure", "ei", "--out", csv_path});
  CHECK(w.code == 0);
  CHECK(json::parse(w.out)["measure"] == "ei");
  CHECK(testing::slurp(csv_path).find("threshold,fpr,tpr\ninf,0,0\n") != std::string::npos);

  const auto missing = tmp.write("bad.csv", "edges,labels,class\nb1.edges,b1.labels,polarized\nzz.edges,b1.labels,nonpolarized\n");
  const auto m = run({"roc", "--manifest", missing});
  CHECK(m.code == 2);
  CHECK(m.err.find("row 3") != std::string::npos);
  const auto single = tmp.write("one.csv", "edges,labels,class\nb1.edges,b1.labels,polarized\n");
  CHECK(run({"roc", "--manifest", single}).code == 2);
  const auto header = tmp.write("hdr.csv", "e,l,c\n");
  CHECK(run({"roc", "--manifest", header}).code == 2);
}

TEST_CASE("approx command") {
  Fixture f;
  const auto r = run({"approx", "--edges", f.edges, "--labels", f.labels, "--fractions", "0.5,1", "--seeds", "3"});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("fraction,mae,sd,n_seeds\n0.5,") != std::string::npos);
  CHECK(r.out.find("\n1,0,0,3\n") != std::string::npos);
  const auto j = run({"approx", "--edges", f.edges, "--labels", f.labels, "--seeds", "2", "--format", "json"});
  CHECK(json::parse(j.out)["rows"].size() == 4);
  CHECK(run({"approx", "--edges", f.edges, "--labels", f.labels, "--fractions", "0"}).code == 2);
}
