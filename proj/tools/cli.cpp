#include "cli.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polarimeter/baselines.hpp"
#include "polarimeter/diffusion.hpp"
#include "polarimeter/dsp.hpp"
#include "polarimeter/error.hpp"
#include "polarimeter/evaluation.hpp"
#include "polarimeter/generators.hpp"
#include "polarimeter/graph.hpp"
#include "polarimeter/null_models.hpp"
#include "polarimeter/parallel.hpp"
#include "polarimeter/random.hpp"

#ifndef POLARIMETER_VERSION
#define POLARIMETER_VERSION "0.0.0"
#endif

namespace polarimeter::cli {
namespace {

using json = nlohmann::json;
namespace fs = std::filesystem;

std::string num(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

// ---- flag groups --------------------------------------------------------------

struct DiffusionFlags {
  double alpha = 0.85;
  double tol = 1e-10;
  std::size_t max_iter = 100000;
  std::string dangling = "uniform";

  void bind(CLI::App* app) {
    app->add_option("--alpha", alpha, "Follow-through probability in (0,1)")->capture_default_str();
    app->add_option("--tol", tol, "L1 convergence threshold")->capture_default_str();
    app->add_option("--max-iter", max_iter, "Power iteration cap")->capture_default_str();
    app->add_option("--dangling", dangling, "Dangling vertex policy")
        ->check(CLI::IsMember({"uniform", "source"}))
        ->capture_default_str();
  }

  DiffusionParams resolve() const {
    DiffusionParams p;
    p.alpha = alpha;
    p.tolerance = tol;
    p.max_iterations = max_iter;
    p.dangling = parse_dangling_policy(dangling);
    p.validate();
    return p;
  }
};

struct MeasureFlags {
  std::vector<std::string> measures;
  std::optional<std::size_t> influencers;
  std::optional<double> influencer_frac;
  bool exclude = false;
  std::size_t walks = 10000;
  std::uint64_t seed = 0;
  std::optional<double> sample_frac;
  std::size_t bcc_bins = 512;
  bool bcc_weighted = false;
  double cca_hop = 0.5;

  void bind(CLI::App* app, bool many, const std::string& fallback) {
    auto* m = app->add_option("--measure", measures, many ? "Measures (comma separated, or 'all')" : "Measure");
    if (many) m->delimiter(',');
    else m->expected(1);
    m->default_str(fallback);
    auto* k = app->add_option("--influencers", influencers, "Fixed influencer count per side (RWC)");
    auto* f = app->add_option("--influencer-frac", influencer_frac, "Influencer fraction per side (RWC, ARWC, DM)");
    k->excludes(f);
    app->add_flag("--exclude-influencers", exclude, "Remove influencers from the walk restart set");
    app->add_option("--walks", walks, "Random walks per side (RWC, ARWC)")->capture_default_str();
    app->add_option("--seed", seed, "Master seed")->capture_default_str();
    app->add_option("--sample-frac", sample_frac, "Estimate DSP from this fraction of sources");
    app->add_option("--bcc-bins", bcc_bins, "BCC density grid size")->capture_default_str();
    app->add_flag("--bcc-weighted", bcc_weighted, "BCC: use edge weights as path lengths");
    app->add_option("--cca-hop", cca_hop, "CCA indirect-neighbor weight")->capture_default_str();
  }

  std::vector<MeasureName> resolve_measures(const std::string& fallback) const {
    std::vector<std::string> names = measures.empty() ? std::vector<std::string>{fallback} : measures;
    std::vector<MeasureName> out;
    for (const auto& name : names) {
      if (name == "all") {
        for (auto m : all_measures()) out.push_back(m);
      } else {
        out.push_back(parse_measure_name(name));
      }
    }
    return out;
  }

  MeasureOptions resolve(const DiffusionParams& diffusion) const {
    MeasureOptions o;
    o.diffusion = diffusion;
    if (influencer_frac) {
      o.influencers = {InfluencerCount::fraction, 1, *influencer_frac, exclude};
      o.arwc_fraction = *influencer_frac;
      o.dm_influencers = {InfluencerCount::fraction, 1, *influencer_frac, false};
    } else {
      o.influencers = {InfluencerCount::fixed, influencers.value_or(10), 0.10, exclude};
      if (influencers) o.dm_influencers = {InfluencerCount::fixed, *influencers, 0.10, false};
    }
    o.influencers.validate();
    o.dm_influencers.validate();
    if (!(o.arwc_fraction > 0.0 && o.arwc_fraction <= 0.5)) throw InputError("ARWC fraction must lie in (0, 0.5]");
    if (walks == 0) throw InputError("--walks must be positive");
    o.walks = walks;
    o.seed = seed;
    if (sample_frac && !(*sample_frac > 0.0 && *sample_frac <= 1.0))
      throw InputError("--sample-frac must lie in (0, 1]");
    o.sample_fraction = sample_frac;
    if (bcc_bins < 2) throw InputError("--bcc-bins must be at least 2");
    o.bcc_bins = bcc_bins;
    o.bcc_weights_as_distances = bcc_weighted;
    if (!(cca_hop > 0.0 && cca_hop <= 1.0)) throw InputError("--cca-hop must lie in (0, 1]");
    o.cca_alpha_hop = cca_hop;
    return o;
  }
};

struct GraphFlags {
  std::string edges;
  std::string labels;
  bool undirected = false;

  void bind(CLI::App* app) {
    app->add_option("--edges", edges, "Edge list (src TAB dst [TAB weight])")->required();
    app->add_option("--labels", labels, "Label file (vertex TAB color)")->required();
    app->add_flag("--undirected", undirected, "Each edge line stands for both directions");
  }

  ColoredGraph load() const { return load_colored_graph(edges, labels, !undirected); }

  json to_json() const { return {{"edges", edges}, {"labels", labels}, {"directed", !undirected}}; }
};

struct GeneratorFlags {
  std::string kind;
  std::size_t n = 0;
  std::size_t red = 0;
  std::size_t blue = 0;
  std::size_t clique = 0;
  std::size_t path = 0;
  std::optional<double> p;
  std::optional<double> d;
  double q = 0.0;
  double red_frac = 0.5;
  std::uint64_t seed = 0;
  std::string policy = "reject";

  void bind(CLI::App* app, bool with_seed) {
    app->add_option("kind", kind, "clique | alternating-cycle | half-split-cycle | barbell | gnpl | sbm")->required();
    app->add_option("--n", n, "Vertex count (alternating-cycle, gnpl, sbm)");
    app->add_option("--red", red, "Red vertices (clique, half-split-cycle) or red clique size (barbell)");
    app->add_option("--blue", blue, "Blue vertices (clique, half-split-cycle) or blue clique size (barbell)");
    app->add_option("--clique", clique, "Clique size of a balanced barbell");
    app->add_option("--path", path, "Barbell chain length (even)");
    app->add_option("--p", p, "Edge probability (gnpl) or intra-block probability (sbm)");
    app->add_option("--d", d, "Mean degree for gnpl; sets p = d/(n-1)");
    app->add_option("--q", q, "Inter-block probability (sbm)");
    app->add_option("--red-frac", red_frac, "Red share of the vertices (gnpl)")->capture_default_str();
    if (with_seed) app->add_option("--seed", seed, "Seed")->capture_default_str();
    app->add_option("--policy", policy, "Disconnected samples: reject | lwcc | keep")
        ->check(CLI::IsMember({"reject", "lwcc", "keep"}))
        ->capture_default_str();
  }

  GeneratorSpec resolve() const {
    GeneratorSpec s;
    s.kind = parse_generator_kind(kind);
    s.seed = seed;
    s.policy = parse_disconnected_policy(policy);
    switch (s.kind) {
      case GeneratorKind::clique:
      case GeneratorKind::half_split_cycle:
        s.n_red = red;
        s.n_blue = blue;
        break;
      case GeneratorKind::alternating_cycle:
        s.n = n;
        break;
      case GeneratorKind::barbell:
        if (clique > 0 && (red > 0 || blue > 0)) throw InputError("barbell: give --clique or --red/--blue, not both");
        s.n_red = clique > 0 ? clique : red;
        s.n_blue = clique > 0 ? clique : blue;
        s.path_length = path;
        break;
      case GeneratorKind::gnpl:
        if (p.has_value() == d.has_value()) throw InputError("gnpl: give exactly one of --p and --d");
        if (n < 2) throw InputError("gnpl: --n must be at least 2");
        s.n = n;
        s.p = p ? *p : *d / static_cast<double>(n - 1);
        s.red_fraction = red_frac;
        split_counts(n, red_frac);
        break;
      case GeneratorKind::sbm:
        if (!p) throw InputError("sbm: --p is required");
        s.n = n;
        s.p = *p;
        s.q = q;
        break;
    }
    return s;
  }
};

json spec_json(const GeneratorSpec& s) {
  json j{{"kind", to_string(s.kind)}};
  switch (s.kind) {
    case GeneratorKind::clique:
    case GeneratorKind::half_split_cycle:
      j["red"] = s.n_red;
      j["blue"] = s.n_blue;
      break;
    case GeneratorKind::alternating_cycle: j["n"] = s.n; break;
    case GeneratorKind::barbell:
      j["red_clique"] = s.n_red;
      j["blue_clique"] = s.n_blue;
      j["path"] = s.path_length;
      break;
    case GeneratorKind::gnpl:
      j["n"] = s.n;
      j["p"] = s.p;
      j["red_frac"] = s.red_fraction;
      j["seed"] = s.seed;
      j["policy"] = to_string(s.policy);
      break;
    case GeneratorKind::sbm:
      j["n"] = s.n;
      j["p"] = s.p;
      j["q"] = s.q;
      j["seed"] = s.seed;
      j["policy"] = to_string(s.policy);
      break;
  }
  return j;
}

json diffusion_json(const DiffusionParams& p) {
  return {{"alpha", p.alpha}, {"tolerance", p.tolerance}, {"max_iterations", p.max_iterations},
          {"dangling", to_string(p.dangling)}};
}

json options_json(const MeasureOptions& o) {
  return {{"diffusion", diffusion_json(o.diffusion)},
          {"influencers", o.influencers.to_json()},
          {"arwc_fraction", o.arwc_fraction},
          {"dm_seeds", o.dm_influencers.to_json()},
          {"walks", o.walks},
          {"seed", o.seed},
          {"sample_fraction", o.sample_fraction ? json(*o.sample_fraction) : json(nullptr)},
          {"bcc_bins", o.bcc_bins},
          {"bcc_weights_as_distances", o.bcc_weights_as_distances},
          {"cca_alpha_hop", o.cca_alpha_hop}};
}

json measures_json(const std::vector<MeasureName>& ms) {
  json j = json::array();
  for (auto m : ms) j.push_back(to_string(m));
  return j;
}

json provenance(const std::string& command, json config) {
  return {{"tool", "polarimeter"}, {"version", POLARIMETER_VERSION}, {"command", command}, {"config", std::move(config)}};
}

std::string provenance_comment(const json& prov) { return "# " + prov.dump() + "\n"; }

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InputError("cannot write " + path);
  f << text;
  if (!f) throw InputError("write failed: " + path);
}

std::string checked_format(const std::string& format) {
  if (format != "json" && format != "csv") throw InputError("--format must be json or csv");
  return format;
}

// Severity of a failed computation: 2 for bad input, 3 for numerical trouble.
struct Failure {
  int code = ok;
  void note(int c) {
    if (code == ok || c == validation_error) code = c;
  }
};

json error_json(const std::string& kind, const std::string& message) {
  return {{"kind", kind}, {"message", message}};
}

template <typename Fn>
std::optional<MeasureResult> try_measure(Fn&& fn, json& error, Failure& failure) {
  try {
    return fn();
  } catch (const InputError& e) {
    error = error_json("validation", e.what());
    failure.note(validation_error);
  } catch (const NumericalError& e) {
    error = error_json("numerical", e.what());
    failure.note(numerical_error);
  }
  return std::nullopt;
}

json graph_summary(const ColoredGraph& g) {
  json sizes = json::object();
  const auto part = partition(g);
  for (std::size_t c = 0; c < part.color_sizes.size(); ++c) sizes[g.color_names()[c]] = part.color_sizes[c];
  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(structure_hash(g)));
  return {{"n", g.vertex_count()}, {"edges", g.edge_count()}, {"color_sizes", sizes}, {"structure_hash", hash}};
}

// ---- commands ---------------------------------------------------------------

struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string out_path;
  std::string format;
};

int cmd_generate(const GeneratorFlags& gf, const std::string& prefix, Context& ctx) {
  const GeneratorSpec spec = gf.resolve();
  const ColoredGraph g = generate(spec);
  const std::string edges = prefix + ".edges", labels = prefix + ".labels";
  save_edge_list(g, edges);
  save_labels(g, labels);
  json summary = graph_summary(g);
  summary["files"] = {edges, labels};
  summary["provenance"] = provenance("generate", {{"generator", spec_json(spec)}, {"out", prefix}});
  ctx.out << summary.dump(2) << "\n";
  return ok;
}

int cmd_score(const GraphFlags& gfl, const std::vector<MeasureName>& measures, const MeasureOptions& opts,
              Context& ctx) {
  const ColoredGraph g = gfl.load();
  json config{{"graph", gfl.to_json()}, {"measures", measures_json(measures)}, {"options", options_json(opts)}};
  const json prov = provenance("score", config);

  Failure failure;
  json entries = json::array();
  std::ostringstream csv;
  csv << provenance_comment(prov) << "measure,raw,rescaled,seed,error\n";
  for (MeasureName m : measures) {
    json error;
    auto res = try_measure([&] { return score_measure(m, g, opts); }, error, failure);
    json entry;
    if (res) {
      entry = to_json(*res);
      csv << to_string(m) << ',' << num(res->raw) << ',' << num(res->rescaled) << ','
          << (res->seed ? std::to_string(*res->seed) : "") << ",\n";
    } else {
      entry = {{"measure", to_string(m)}, {"error", error}};
      std::string msg = error["message"].get<std::string>();
      std::replace(msg.begin(), msg.end(), ',', ';');
      csv << to_string(m) << ",,,," << msg << "\n";
      ctx.err << "polarimeter: " << to_string(m) << ": " << error["message"].get<std::string>() << "\n";
    }
    entry["provenance"] = prov;
    entries.push_back(std::move(entry));
  }
  emit(ctx.format == "csv" ? csv.str() : entries.dump(2) + "\n", ctx.out_path, ctx.out);
  return failure.code;
}

int cmd_ensemble(const GeneratorSpec& spec, std::size_t samples, const std::vector<MeasureName>& measures,
                 const MeasureOptions& opts, Context& ctx) {
  if (samples == 0) throw InputError("--samples must be positive");
  json config{{"generator", spec_json(spec)},
              {"samples", samples},
              {"measures", measures_json(measures)},
              {"options", options_json(opts)},
              {"member_seeds", "derive_seed(seed, member)"},
              {"measure_seeds", "derive_seed(seed, member, 1)"}};
  const json prov = provenance("ensemble", config);

  const std::size_t k = measures.size();
  std::vector<std::optional<double>> raw(samples * k);
  std::vector<json> errors(samples * k);
  std::vector<int> codes(samples * k, ok);
  parallel_for(samples, [&](std::size_t i) {
    std::optional<ColoredGraph> g;
    json gen_error;
    int gen_code = ok;
    try {
      g = generate(with_member_seed(spec, i));
    } catch (const InputError& e) {
      gen_error = error_json("validation", e.what());
      gen_code = validation_error;
    } catch (const NumericalError& e) {
      gen_error = error_json("numerical", e.what());
      gen_code = numerical_error;
    }
    MeasureOptions o = opts;
    o.seed = derive_seed(opts.seed, i, 1);
    for (std::size_t j = 0; j < k; ++j) {
      if (!g) {
        errors[i * k + j] = gen_error;
        codes[i * k + j] = gen_code;
        continue;
      }
      Failure f;
      auto res = try_measure([&] { return score_measure(measures[j], *g, o); }, errors[i * k + j], f);
      if (res) raw[i * k + j] = res->raw;
      codes[i * k + j] = f.code;
    }
  });

  Failure failure;
  json reports = json::array();
  std::ostringstream csv;
  csv << provenance_comment(prov) << "measure,stat,value\n";
  for (std::size_t j = 0; j < k; ++j) {
    std::vector<double> values;
    json failures = json::array();
    for (std::size_t i = 0; i < samples; ++i) {
      if (raw[i * k + j]) {
        values.push_back(*raw[i * k + j]);
      } else {
        failure.note(codes[i * k + j]);
        failures.push_back({{"member", i}, {"error", errors[i * k + j]}});
      }
    }
    const std::string name = to_string(measures[j]);
    json rep{{"measure", name}, {"samples", values}, {"n_samples", values.size()}, {"failures", failures}};
    if (!values.empty()) {
      const SampleSummary s = summarize(values);
      rep["mean"] = s.mean;
      rep["sd"] = s.sd;
      rep["quantiles"] = {{"0.05", s.quantiles[0]}, {"0.5", s.quantiles[1]}, {"0.95", s.quantiles[2]}};
      csv << name << ",mean," << num(s.mean) << "\n"
          << name << ",sd," << num(s.sd) << "\n"
          << name << ",q05," << num(s.quantiles[0]) << "\n"
          << name << ",q50," << num(s.quantiles[1]) << "\n"
          << name << ",q95," << num(s.quantiles[2]) << "\n";
    } else {
      rep["mean"] = nullptr;
      rep["sd"] = nullptr;
      rep["quantiles"] = nullptr;
    }
    csv << name << ",n_samples," << values.size() << "\n" << name << ",failures," << failures.size() << "\n";
    reports.push_back(std::move(rep));
  }
  json doc{{"provenance", prov}, {"reports", reports}};
  emit(ctx.format == "csv" ? csv.str() : doc.dump(2) + "\n", ctx.out_path, ctx.out);
  return failure.code;
}

int cmd_denoise(const GraphFlags& gfl, MeasureName measure, const MeasureOptions& opts, const std::string& null_spec,
                std::size_t samples, const std::string& mode, double swaps, Context& ctx) {
  DenoiseRequest req;
  req.measure = measure;
  req.options = opts;
  req.n_samples = samples;
  req.seed = opts.seed;
  req.swaps_per_edge = swaps;
  if (mode == "subtract") req.mode = DenoiseMode::subtract;
  else if (mode == "zscore") req.mode = DenoiseMode::zscore;
  else throw InputError("--mode must be subtract or zscore");
  std::string external_dir;
  if (null_spec == "shuffle") req.null_kind = NullKind::label_shuffle;
  else if (null_spec == "config") req.null_kind = NullKind::configuration;
  else if (null_spec.rfind("external:", 0) == 0 && null_spec.size() > 9) {
    req.null_kind = NullKind::external;
    external_dir = null_spec.substr(9);
  } else {
    throw InputError("--null must be shuffle, config or external:DIR");
  }
  if (req.null_kind != NullKind::external && samples == 0) throw InputError("--samples must be positive");
  if (!(swaps >= 0.0)) throw InputError("--swaps-per-edge must be >= 0");

  const ColoredGraph g = gfl.load();
  if (req.null_kind == NullKind::external) req.external = load_external_samples(external_dir, g, !gfl.undirected);

  json config{{"graph", gfl.to_json()},
              {"measure", to_string(measure)},
              {"options", options_json(opts)},
              {"null", null_spec},
              {"samples", req.null_kind == NullKind::external ? req.external.size() : samples},
              {"mode", mode},
              {"swaps_per_edge", swaps},
              {"sample_seeds", "derive_seed(seed, i, 0)"},
              {"measure_seeds", "derive_seed(seed, i, 1)"}};
  const json prov = provenance("denoise", config);
  const EnsembleReport rep = denoise(g, req);
  json doc = to_json(rep);
  doc["provenance"] = prov;
  std::ostringstream csv;
  csv << provenance_comment(prov) << "stat,value\n"
      << "observed," << num(rep.observed) << "\n"
      << "null_mean," << num(rep.null_mean) << "\n"
      << "null_sd," << num(rep.null_sd) << "\n"
      << "q05," << num(rep.quantiles[0]) << "\n"
      << "q50," << num(rep.quantiles[1]) << "\n"
      << "q95," << num(rep.quantiles[2]) << "\n"
      << "denoised," << num(rep.denoised) << "\n"
      << "n_samples," << rep.n_samples << "\n";
  emit(ctx.format == "csv" ? csv.str() : doc.dump(2) + "\n", ctx.out_path, ctx.out);
  return ok;
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  fields.push_back(cur);
  return fields;
}

int cmd_roc(const std::string& manifest, MeasureName measure, const MeasureOptions& opts, Context& ctx) {
  std::ifstream in(manifest);
  if (!in) throw InputError("cannot open manifest " + manifest);
  const fs::path base = fs::path(manifest).parent_path();
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  struct Row {
    std::size_t line;
    std::string edges, labels;
    ScoreClass label;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#' || line == "\r") continue;
    const auto f = split_csv_line(line);
    if (!header) {
      if (f != std::vector<std::string>{"edges", "labels", "class"})
        throw InputError("manifest " + manifest + ": header must be edges,labels,class");
      header = true;
      continue;
    }
    if (f.size() != 3) throw InputError("manifest row " + std::to_string(line_no) + ": expected 3 fields");
    Row r{line_no, f[0], f[1], ScoreClass::nonpolarized};
    try {
      r.label = parse_score_class(f[2]);
    } catch (const InputError& e) {
      throw InputError("manifest row " + std::to_string(line_no) + ": " + e.what());
    }
    for (const auto* p : {&r.edges, &r.labels}) {
      const fs::path resolved = fs::path(*p).is_absolute() ? fs::path(*p) : base / *p;
      if (!fs::exists(resolved))
        throw InputError("manifest row " + std::to_string(line_no) + ": file not found: " + resolved.string());
    }
    rows.push_back(std::move(r));
  }
  if (!header) throw InputError("manifest " + manifest + " is empty");

  std::vector<LabeledScore> scores(rows.size());
  std::vector<std::string> errors(rows.size());
  std::vector<int> codes(rows.size(), ok);
  parallel_for(rows.size(), [&](std::size_t i) {
    const Row& r = rows[i];
    auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
    try {
      const ColoredGraph g = load_colored_graph(resolve(r.edges), resolve(r.labels));
      scores[i] = {r.edges, score_measure(measure, g, opts).rescaled, r.label};
    } catch (const InputError& e) {
      errors[i] = e.what();
      codes[i] = validation_error;
    } catch (const NumericalError& e) {
      errors[i] = e.what();
      codes[i] = numerical_error;
    }
  });
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (codes[i] == ok) continue;
    const std::string msg = "manifest row " + std::to_string(rows[i].line) + ": " + errors[i];
    if (codes[i] == numerical_error) throw NumericalError(msg);
    throw InputError(msg);
  }

  const RocResult roc = roc_auc(scores);
  json config{{"manifest", manifest}, {"measure", to_string(measure)}, {"options", options_json(opts)}};
  const json prov = provenance("roc", config);
  std::ostringstream csv;
  csv << provenance_comment(prov) << "threshold,fpr,tpr\n";
  json curve = json::array();
  for (const auto& p : roc.curve) {
    csv << (std::isinf(p.threshold) ? std::string("inf") : num(p.threshold)) << ',' << num(p.fpr) << ','
        << num(p.tpr) << "\n";
    curve.push_back({{"threshold", std::isinf(p.threshold) ? json(nullptr) : json(p.threshold)},
                     {"fpr", p.fpr},
                     {"tpr", p.tpr}});
  }
  json items = json::array();
  for (const auto& s : scores) items.push_back({{"name", s.name}, {"score", s.score}, {"class", to_string(s.label)}});
  json summary{{"auc", roc.auc},
               {"measure", to_string(measure)},
               {"score", "rescaled"},
               {"orientation", "higher score means more polarized"},
               {"curve", curve},
               {"items", items},
               {"provenance", prov}};
  if (!ctx.out_path.empty()) {
    // CSV to the file, the summary to stdout.
    emit(csv.str(), ctx.out_path, ctx.out);
    ctx.out << summary.dump(2) << "\n";
  } else {
    ctx.out << (ctx.format == "csv" ? csv.str() : summary.dump(2) + "\n");
  }
  return ok;
}

int cmd_approx(const GraphFlags& gfl, const DiffusionParams& params, const std::vector<double>& fractions,
               std::size_t seeds, std::uint64_t seed, Context& ctx) {
  if (fractions.empty()) throw InputError("--fractions must not be empty");
  if (seeds == 0) throw InputError("--seeds must be positive");
  for (double f : fractions)
    if (!(f > 0.0 && f <= 1.0)) throw InputError("--fractions must lie in (0, 1]");
  const ColoredGraph g = gfl.load();
  json config{{"graph", gfl.to_json()},
              {"diffusion", diffusion_json(params)},
              {"fractions", fractions},
              {"seeds", seeds},
              {"seed", seed},
              {"sample_seeds", "derive_seed(seed, j)"}};
  const json prov = provenance("approx", config);
  const ApproximationReport rep = approximation_report(g, params, fractions, seeds, seed);
  std::ostringstream csv;
  csv << provenance_comment(prov) << "fraction,mae,sd,n_seeds\n";
  json rows = json::array();
  for (const auto& r : rep.rows) {
    csv << num(r.fraction) << ',' << num(r.mae) << ',' << num(r.sd) << ',' << r.n_seeds << "\n";
    rows.push_back({{"fraction", r.fraction}, {"mae", r.mae}, {"sd", r.sd}, {"n_seeds", r.n_seeds},
                    {"estimates", r.estimates}});
  }
  json doc{{"exact", rep.exact}, {"rows", rows}, {"provenance", prov}};
  emit(ctx.format == "csv" ? csv.str() : doc.dump(2) + "\n", ctx.out_path, ctx.out);
  return ok;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Structural polarization measures for two-colored networks", "polarimeter"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("polarimeter ") + POLARIMETER_VERSION);

  std::string out_path;
  std::string format;
  auto add_output = [&](CLI::App* sub, const std::string& default_format) {
    sub->add_option("--out", out_path, "Write the result to this file");
    format = default_format;
    sub->add_option("--format", format, "json | csv")->capture_default_str();
  };

  // generate
  GeneratorFlags gen_flags;
  std::string gen_prefix;
  auto* gen = app.add_subcommand("generate", "Write a reference or random graph as edge list + labels");
  gen_flags.bind(gen, true);
  gen->add_option("--out", gen_prefix, "Output prefix; writes PREFIX.edges and PREFIX.labels")->required();

  // score
  GraphFlags score_graph;
  DiffusionFlags score_diff;
  MeasureFlags score_meas;
  auto* score = app.add_subcommand("score", "Score a labeled graph with one or more measures");
  score_graph.bind(score);
  score_diff.bind(score);
  score_meas.bind(score, true, "all");

  // ensemble
  GeneratorFlags ens_gen;
  DiffusionFlags ens_diff;
  MeasureFlags ens_meas;
  std::size_t ens_samples = 0;
  auto* ens = app.add_subcommand("ensemble", "Score many generated graphs and summarize each measure");
  ens_gen.bind(ens, false);
  ens_diff.bind(ens);
  ens_meas.bind(ens, true, "dsp");
  ens->add_option("--samples", ens_samples, "Ensemble size")->required();

  // denoise
  GraphFlags den_graph;
  DiffusionFlags den_diff;
  MeasureFlags den_meas;
  std::string den_null = "shuffle";
  std::size_t den_samples = 100;
  std::string den_mode = "subtract";
  double den_swaps = 10.0;
  auto* den = app.add_subcommand("denoise", "Compare a score with its null-model distribution");
  den_graph.bind(den);
  den_diff.bind(den);
  den_meas.bind(den, false, "dsp");
  den->add_option("--null", den_null, "shuffle | config | external:DIR")->capture_default_str();
  den->add_option("--samples", den_samples, "Null samples")->capture_default_str();
  den->add_option("--mode", den_mode, "subtract | zscore")->capture_default_str();
  den->add_option("--swaps-per-edge", den_swaps, "Configuration model mixing")->capture_default_str();

  // roc
  std::string roc_manifest;
  DiffusionFlags roc_diff;
  MeasureFlags roc_meas;
  auto* roc = app.add_subcommand("roc", "ROC curve and AUC of one measure over a labeled manifest");
  roc->add_option("--manifest", roc_manifest, "CSV with header edges,labels,class")->required();
  roc_diff.bind(roc);
  roc_meas.bind(roc, false, "dsp");

  // approx
  GraphFlags apx_graph;
  DiffusionFlags apx_diff;
  std::vector<double> apx_fractions{0.1, 0.2, 0.4, 0.8};
  std::size_t apx_seeds = 50;
  std::uint64_t apx_seed = 0;
  auto* apx = app.add_subcommand("approx", "Error of sampled DSP against the exact value");
  apx_graph.bind(apx);
  apx_diff.bind(apx);
  apx->add_option("--fractions", apx_fractions, "Sample fractions")->delimiter(',')->capture_default_str();
  apx->add_option("--seeds", apx_seeds, "Seeds per fraction")->capture_default_str();
  apx->add_option("--seed", apx_seed, "Master seed")->capture_default_str();

  for (auto* sub : {score, ens, den, roc}) add_output(sub, "json");
  add_output(apx, "csv");
  for (auto* sub : {score, ens, den, roc, apx})
    sub->parse_complete_callback([&format, sub] {
      if (sub->count("--format") == 0) format = sub->get_name() == "approx" ? "csv" : "json";
    });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : validation_error;
  }

  Context ctx{out, err, out_path, format};
  try {
    checked_format(format);
    if (*gen) return cmd_generate(gen_flags, gen_prefix, ctx);
    if (*score) {
      const auto measures = score_meas.resolve_measures("all");
      const auto opts = score_meas.resolve(score_diff.resolve());
      return cmd_score(score_graph, measures, opts, ctx);
    }
    if (*ens) {
      ens_gen.seed = ens_meas.seed;
      const auto spec = ens_gen.resolve();
      const auto measures = ens_meas.resolve_measures("dsp");
      const auto opts = ens_meas.resolve(ens_diff.resolve());
      return cmd_ensemble(spec, ens_samples, measures, opts, ctx);
    }
    if (*den) {
      const auto measures = den_meas.resolve_measures("dsp");
      if (measures.size() != 1) throw InputError("denoise takes exactly one measure");
      const auto opts = den_meas.resolve(den_diff.resolve());
      return cmd_denoise(den_graph, measures.front(), opts, den_null, den_samples, den_mode, den_swaps, ctx);
    }
    if (*roc) {
      const auto measures = roc_meas.resolve_measures("dsp");
      if (measures.size() != 1) throw InputError("roc takes exactly one measure");
      const auto opts = roc_meas.resolve(roc_diff.resolve());
      return cmd_roc(roc_manifest, measures.front(), opts, ctx);
    }
    if (*apx) return cmd_approx(apx_graph, apx_diff.resolve(), apx_fractions, apx_seeds, apx_seed, ctx);
  } catch (const InputError& e) {
    err << "polarimeter: " << e.what() << "\n";
    return validation_error;
  } catch (const NumericalError& e) {
    err << "polarimeter: " << e.what() << "\n";
    return numerical_error;
  }
  return validation_error;
}

}  // namespace polarimeter::cli
