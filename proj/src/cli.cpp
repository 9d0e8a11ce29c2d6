#include "slgad/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>

#include "slgad/error.hpp"
#include "slgad/model.hpp"
#include "slgad/rng.hpp"
#include "slgad/scorer.hpp"
#include "slgad/trainer.hpp"

namespace slgad::cli {
namespace fs = std::filesystem;

namespace {

using Overrides = std::map<std::string, std::string>;

constexpr const char* kResolvedConfig = "config.resolved";
constexpr double kBetaSweep[] = {0.2, 0.4, 0.6, 0.8, 1.0};

std::string format_auc(double auc) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", auc);
  return buf;
}

std::string format_real(double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

// Binds a flag to a RunConfig key; values are applied after the config file.
void add_override(CLI::App* app, const std::string& flag, const std::string& key,
                  Overrides& overrides, const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&overrides, key](const std::string& v) { overrides[key] = v; }, help);
}

void add_run_flags(CLI::App* app, Overrides& ov) {
  add_override(app, "--k", "k", ov, "view size K (nodes per sampled view)");
  add_override(app, "--d-hidden", "d_hidden", ov, "hidden dimension D'");
  add_override(app, "--alpha", "alpha", ov, "weight of the contrastive term");
  add_override(app, "--beta", "beta", ov, "weight of the generative term");
  add_override(app, "--lr", "lr", ov, "Adam learning rate");
  add_override(app, "--epochs", "epochs", ov, "training epochs E");
  add_override(app, "--batch-size", "batch_size", ov, "batch size B");
  add_override(app, "--rounds", "rounds", ov, "evaluation rounds R");
  add_override(app, "--negative-ratio", "negative_ratio", ov, "negatives per positive pair");
  add_override(app, "--seed", "seed", ov, "random seed");
  add_override(app, "--restart-prob", "restart_prob", ov, "random-walk restart probability");
  add_override(app, "--threads", "threads", ov, "worker threads");
  add_override(app, "--mode", "mode", ov, "full | gen-only | con-only | unweighted | unscaled");
  add_override(app, "--preset", "preset", ov, "cora | citeseer | pubmed | acm | flickr | blogcatalog | toy");
  app->add_flag_callback(
      "--scale-after-averaging", [&ov] { ov["scale_after_averaging"] = "true"; },
      "min-max the generative score once after averaging rounds");
}

struct InjectFlags {
  std::size_t clique_size = 15;
  std::size_t cliques = 5;
  std::optional<std::size_t> attr;
  std::size_t candidates = 50;
  std::uint64_t seed = 0;
};

void add_inject_flags(CLI::App* app, InjectFlags& f) {
  app->add_option("--clique-size", f.clique_size, "nodes per planted clique")->capture_default_str();
  app->add_option("--cliques", f.cliques, "number of planted cliques")->capture_default_str();
  app->add_option("--attr", f.attr, "attribute anomalies (default cliques x clique size)");
  app->add_option("--candidates", f.candidates, "candidate pool per attribute anomaly")
      ->capture_default_str();
  app->add_option("--inject-seed", f.seed, "injection seed (run-all)");
}

InjectionConfig to_injection(const InjectFlags& f) {
  InjectionConfig cfg;
  cfg.clique_size = f.clique_size;
  cfg.n_cliques = f.cliques;
  cfg.n_attr = f.attr.value_or(f.cliques * f.clique_size);
  cfg.candidate_pool = f.candidates;
  cfg.seed = f.seed;
  return cfg;
}

// defaults < preset < base file < config file < flags. The preset key is
// applied first so explicit values always win over it.
RunConfig resolve(const std::optional<fs::path>& base, const std::string& config_file,
                  Overrides overrides) {
  RunConfig cfg;
  Overrides merged;
  if (base && fs::exists(*base)) merged = read_config_file(base->string());
  if (!config_file.empty()) {
    for (auto& [k, v] : read_config_file(config_file)) merged[k] = v;
  }
  for (auto& [k, v] : overrides) merged[k] = v;
  if (auto it = merged.find("preset"); it != merged.end()) {
    apply_preset(cfg, it->second);
    merged.erase(it);
  }
  cfg.apply(merged);
  cfg.validate();
  return cfg;
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file);
  out << text;
  if (!out) throw DataError("failed writing " + file.string());
}

fs::path graph_dir(const fs::path& run_dir) { return run_dir / "graph"; }

Graph load_run_graph(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw DataError("run directory not found: " + run_dir.string());
  return load_graph(graph_dir(run_dir));
}

void inject_to(const fs::path& in_dir, const fs::path& out_dir, const InjectionConfig& inj,
               std::ostream& out) {
  if (!fs::is_directory(in_dir)) throw DataError("dataset directory not found: " + in_dir.string());
  const Graph graph = load_graph(in_dir);
  auto rng = make_rng(inj.seed, Stream::kInject);
  const auto injected = inject_anomalies(graph, inj, rng);
  fs::create_directories(out_dir);
  save_graph(injected.graph, graph_dir(out_dir));
  write_manifest(injected.manifest, out_dir / "manifest.tsv");
  write_text(out_dir / "inject.resolved",
             "clique_size = " + std::to_string(inj.clique_size) + "\n" +
                 "n_cliques = " + std::to_string(inj.n_cliques) + "\n" +
                 "n_attr = " + std::to_string(inj.n_attr) + "\n" +
                 "candidate_pool = " + std::to_string(inj.candidate_pool) + "\n" +
                 "seed = " + std::to_string(inj.seed) + "\n");
  const auto& labels = injected.graph.labels();
  out << "injected " << std::count(labels.begin(), labels.end(), 1) << " anomalies ("
      << injected.manifest.structural.size() << " structural, "
      << injected.manifest.attribute.size() << " attributive, " << injected.manifest.edges_added
      << " edges added) into " << out_dir.string() << "\n";
}

struct SweepResult {
  double beta;
  double auc;
};

// Trains, scores and evaluates one configuration inside `dir`.
double pipeline(const Graph& graph, const RunConfig& cfg, const fs::path& dir) {
  train_stage(graph, cfg, dir);
  score_stage(graph, cfg, dir);
  return eval_stage(graph, dir);
}

int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Self-supervised graph anomaly detection: inject, train, score, evaluate."};
  app.require_subcommand(1);

  // inject
  std::string in_dir, out_dir, run_dir, config_file;
  InjectFlags inject_flags;
  auto* inject = app.add_subcommand("inject", "plant structural + attributive anomalies");
  inject->add_option("--in", in_dir, "dataset directory (edges.tsv, features.tsv)")->required();
  inject->add_option("--out", out_dir, "run directory to create")->required();
  add_inject_flags(inject, inject_flags);
  inject->add_option("--seed", inject_flags.seed, "injection seed");

  // train
  Overrides train_ov;
  auto* train_cmd = app.add_subcommand("train", "train a model on <run>/graph");
  train_cmd->add_option("--run", run_dir, "run directory")->required();
  train_cmd->add_option("--config", config_file, "flat key = value config file");
  add_run_flags(train_cmd, train_ov);

  // score
  Overrides score_ov;
  auto* score_cmd = app.add_subcommand("score", "score every node with a trained checkpoint");
  score_cmd->add_option("--run", run_dir, "run directory")->required();
  score_cmd->add_option("--config", config_file, "flat key = value config file");
  add_run_flags(score_cmd, score_ov);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "ROC-AUC of scores.tsv against graph/labels.tsv");
  eval_cmd->add_option("--run", run_dir, "run directory")->required();

  // run-all
  Overrides all_ov;
  InjectFlags all_inject;
  bool beta_sweep = false, no_inject = false;
  auto* all_cmd = app.add_subcommand("run-all", "inject, train, score and eval in one go");
  all_cmd->add_option("--in", in_dir, "dataset directory")->required();
  all_cmd->add_option("--out", out_dir, "run directory")->required();
  all_cmd->add_option("--config", config_file, "flat key = value config file");
  add_run_flags(all_cmd, all_ov);
  add_inject_flags(all_cmd, all_inject);
  all_cmd->add_flag("--no-inject", no_inject, "dataset already carries labels; copy it as is");
  all_cmd->add_flag("--beta-sweep", beta_sweep, "repeat for beta in {0.2,0.4,0.6,0.8,1}");

  // toy
  std::size_t toy_n = 100;
  std::uint64_t toy_seed = 7;
  auto* toy_cmd = app.add_subcommand("toy", "write the planted-anomaly toy benchmark");
  toy_cmd->add_option("--out", out_dir, "run directory")->required();
  toy_cmd->add_option("--n", toy_n, "node count (>= 20)")->capture_default_str();
  toy_cmd->add_option("--seed", toy_seed, "generator seed")->capture_default_str();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  if (*inject) {
    inject_to(in_dir, out_dir, to_injection(inject_flags), out);
    return kOk;
  }
  if (*train_cmd) {
    const RunConfig cfg = resolve(std::nullopt, config_file, train_ov);
    const Graph graph = load_run_graph(run_dir);
    train_stage(graph, cfg, run_dir);
    out << "trained " << cfg.epochs << " epochs; checkpoint written to "
        << (fs::path(run_dir) / "checkpoint").string() << "\n";
    return kOk;
  }
  if (*score_cmd) {
    const RunConfig cfg = resolve(fs::path(run_dir) / kResolvedConfig, config_file, score_ov);
    const Graph graph = load_run_graph(run_dir);
    score_stage(graph, cfg, run_dir);
    out << "scored " << graph.num_nodes() << " nodes over " << cfg.rounds << " rounds ("
        << to_string(cfg.mode) << ")\n";
    return kOk;
  }
  if (*eval_cmd) {
    const Graph graph = load_run_graph(run_dir);
    out << format_auc(eval_stage(graph, run_dir)) << "\n";
    return kOk;
  }
  if (*all_cmd) {
    const RunConfig cfg = resolve(std::nullopt, config_file, all_ov);
    if (no_inject) {
      const Graph graph = load_graph(in_dir);
      if (!graph.has_labels()) throw DataError("--no-inject needs labels.tsv in the dataset");
      save_graph(graph, graph_dir(out_dir));
    } else {
      inject_to(in_dir, out_dir, to_injection(all_inject), out);
    }
    const Graph graph = load_run_graph(out_dir);
    if (!beta_sweep) {
      out << format_auc(pipeline(graph, cfg, out_dir)) << "\n";
      return kOk;
    }
    std::vector<SweepResult> results;
    for (double beta : kBetaSweep) {
      RunConfig c = cfg;
      c.beta = beta;
      const fs::path dir = fs::path(out_dir) / ("beta-" + format_real(beta));
      fs::create_directories(dir);
      results.push_back({beta, pipeline(graph, c, dir)});
      out << "beta " << format_real(beta) << "\t" << format_auc(results.back().auc) << "\n";
    }
    const auto best = std::max_element(results.begin(), results.end(),
                                       [](auto& a, auto& b) { return a.auc < b.auc; });
    out << "best beta " << format_real(best->beta) << "\t" << format_auc(best->auc) << "\n";
    return kOk;
  }
  if (*toy_cmd) {
    const auto toy = make_toy_benchmark(toy_n, toy_seed);
    save_graph(toy.graph, graph_dir(out_dir));
    write_manifest(toy.manifest, fs::path(out_dir) / "manifest.tsv");
    out << "toy benchmark with " << toy.graph.num_nodes() << " nodes written to " << out_dir
        << "\n";
    return kOk;
  }
  return kUsage;
}

}  // namespace

void train_stage(const Graph& graph, const RunConfig& cfg, const fs::path& run_dir) {
  cfg.validate();
  fs::create_directories(run_dir);
  write_text(run_dir / kResolvedConfig, cfg.serialize());
  std::ofstream log(run_dir / "loss.log", std::ios::trunc);
  if (!log) throw DataError("cannot write " + (run_dir / "loss.log").string());
  const auto result = train(graph, cfg, [&](const EpochLoss& e) {
    log << e.epoch << '\t' << format_real(e.l_gen) << '\t' << format_real(e.l_con) << '\t'
        << format_real(e.l_total) << '\n';
    log.flush();
  });
  save_checkpoint(result.params, cfg.hash(), run_dir / "checkpoint");
}

void score_stage(const Graph& graph, const RunConfig& cfg, const fs::path& run_dir) {
  const auto ck = load_checkpoint(run_dir / "checkpoint");
  if (ck.params.input_dim() != graph.num_features()) {
    throw DataError("checkpoint input dimension does not match the graph");
  }
  const auto table = score_all(graph, ck.params, cfg);
  write_scores(table, run_dir / "scores.tsv");
}

double eval_stage(const Graph& graph, const fs::path& run_dir) {
  const auto scores = read_final_scores(run_dir / "scores.tsv");
  if (scores.size() != graph.num_nodes()) {
    throw DataError("scores.tsv has " + std::to_string(scores.size()) + " rows for " +
                    std::to_string(graph.num_nodes()) + " nodes");
  }
  if (!graph.has_labels()) throw DataError("graph has no labels.tsv to evaluate against");
  RocCurve roc;
  try {
    roc = roc_auc(scores, graph.labels());
  } catch (const std::invalid_argument& e) {
    throw DataError(e.what());
  }
  write_roc(roc, run_dir / "roc.tsv");
  return roc.auc;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  try {
    return dispatch(args, out, err);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const NumericError& e) {
    err << "numeric failure: " << e.what() << "\n";
    return kNumeric;
  } catch (const DataError& e) {
    err << "data error: " << e.what() << "\n";
    return kData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kData;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace slgad::cli
