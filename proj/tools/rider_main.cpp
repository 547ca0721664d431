/**
 * rider - RNA inverse design pipeline CLI.
 *
 * Subcommands: score, featurize, sample, pretrain, train-rl, reward, fold,
 * config. Machine-readable output is JSON on stdout; progress lines go to
 * stderr. Exit codes: 0 success, 1 usage, 2 input/parse, 3 numeric/training
 * failure.
 */

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "rider/config.hpp"
#include "rider/diffusion.hpp"
#include "rider/errors.hpp"
#include "rider/featurize.hpp"
#include "rider/metrics.hpp"
#include "rider/oracle.hpp"
#include "rider/policy.hpp"
#include "rider/rewards.hpp"
#include "rider/rl.hpp"
#include "rider/struct_io.hpp"

namespace {

using namespace rider;

std::string read_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write '" + path + "'");
  f << content;
}

/// --seed flag beats config seed beats RIDER_SEED beats 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag_seed,
                           const config::RunConfig& cfg) {
  if (flag_seed) return *flag_seed;
  if (cfg.seed_set) return cfg.seed;
  if (const char* env = std::getenv("RIDER_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ConfigError("RIDER_SEED is not an unsigned integer");
    }
  }
  return 0;
}

config::RunConfig load_config_or_default(const std::string& path) {
  if (path.empty()) {
    config::RunConfig cfg;
    cfg.rl.reward = cfg.reward;
    return cfg;
  }
  return config::load_run_config(path);
}

std::unique_ptr<oracle::FoldingOracle> make_oracle(const config::RunConfig& cfg) {
  if (cfg.oracle.kind == "helix") return std::make_unique<oracle::HelixOracle>();
  if (cfg.oracle.kind == "subprocess") {
    oracle::SubprocessOracleConfig sc;
    sc.cmd_template = cfg.oracle.command;
    sc.workdir = cfg.oracle.workdir;
    sc.timeout_s = cfg.oracle.timeout_s;
    sc.pool_size = cfg.oracle.pool_size;
    return std::make_unique<oracle::SubprocessOracle>(sc);
  }
  return nullptr;  // "none"
}

policy::PolicyParams load_checkpoint_for(const config::RunConfig& cfg, const std::string& path) {
  policy::PolicyParams params = policy::from_checkpoint_json(read_file(path));
  if (params.spec.h_dim != cfg.encoder.hidden_scalar)
    throw ConfigError("checkpoint h_dim " + std::to_string(params.spec.h_dim) +
                      " does not match encoder.hidden_scalar " +
                      std::to_string(cfg.encoder.hidden_scalar));
  return params;
}

Eigen::MatrixXd conditioning_for(const config::RunConfig& cfg,
                                 const io::BackboneStructure& target) {
  const auto graph = feat::build_graph(target, cfg.graph_k);
  return feat::encode_structure(graph, feat::make_encoder_params(cfg.encoder)).scalar;
}

std::string epoch_log_line(const rl::EpochLogEntry& e, bool timing) {
  char buf[240];
  std::snprintf(buf, sizeof(buf),
                "{\"epoch\":%d,\"mean_reward\":%.10g,\"baseline\":%.10g,\"clip_frac\":%.10g,"
                "\"mean_abs_adv\":%.10g,\"wall_ms\":%.10g}",
                e.epoch, e.mean_reward, e.baseline, e.clip_frac, e.mean_abs_adv,
                timing ? e.wall_ms : 0.0);
  return buf;
}

int run_score(const std::string& pdb_a, const std::string& pdb_b, const std::string& json_out) {
  const auto a = io::parse_pdb_backbone(read_file(pdb_a), pdb_a);
  const auto b = io::parse_pdb_backbone(read_file(pdb_b), pdb_b);
  if (a.dropped_residues + b.dropped_residues > 0)
    std::cerr << "warning: dropped " << a.dropped_residues + b.dropped_residues
              << " incomplete residues\n";
  const std::string json = metrics::to_json(metrics::metrics_report(a.structure, b.structure));
  if (!json_out.empty()) write_file(json_out, json + "\n");
  std::cout << json << "\n";
  return 0;
}

int run_featurize(const std::string& pdb, const std::string& dump_json, std::size_t k,
                  bool pad_parity) {
  const auto parsed = io::parse_pdb_backbone(read_file(pdb), pdb);
  const auto graph = feat::build_graph(parsed.structure, k, pad_parity);
  const std::string json = feat::graph_to_json(graph);
  if (!dump_json.empty())
    write_file(dump_json, json + "\n");
  else
    std::cout << json << "\n";
  std::cerr << "featurized " << graph.n_nodes << " nodes, k=" << graph.k << "\n";
  return 0;
}

int run_sample(const config::RunConfig& cfg, const std::string& checkpoint,
               const std::string& target_pdb, int n, double temperature,
               const std::optional<std::uint64_t>& seed_flag, const std::string& out_fasta,
               const std::string& out_metrics) {
  const auto params = load_checkpoint_for(cfg, checkpoint);
  const auto target = io::parse_pdb_backbone(read_file(target_pdb), target_pdb).structure;
  const Eigen::MatrixXd h = conditioning_for(cfg, target);
  const auto oracle_ptr = make_oracle(cfg);
  Rng rng(resolve_seed(seed_flag, cfg));

  std::string fasta;
  std::string metrics_lines;
  for (int i = 0; i < n; ++i) {
    Rng stream = rng.derive(static_cast<std::uint64_t>(i));
    auto [seq, traj] = diffusion::sample_sequence(params, h, cfg.sampler.n_steps, temperature,
                                                  cfg.schedule, stream);
    fasta += io::to_fasta("design_" + std::to_string(i), seq.letters);
    if (oracle_ptr) {
      const auto folded = oracle_ptr->fold(seq.letters);
      const auto report = metrics::metrics_report(folded, target);
      nlohmann::json j;
      j["design"] = i;
      j["sequence"] = seq.letters;
      j["metrics"] = nlohmann::json::parse(metrics::to_json(report));
      metrics_lines += j.dump() + "\n";
    }
  }

  if (!out_fasta.empty())
    write_file(out_fasta, fasta);
  else
    std::cout << fasta;
  if (oracle_ptr) {
    if (!out_metrics.empty())
      write_file(out_metrics, metrics_lines);
    else
      std::cout << metrics_lines;
  }
  return 0;
}

int run_pretrain(const config::RunConfig& cfg, const std::string& out_ckpt,
                 const std::string& loss_log, const std::optional<std::uint64_t>& seed_flag,
                 std::optional<int> iters_flag) {
  const auto tasks = config::make_synthetic_tasks(cfg);
  const auto encoder = feat::make_encoder_params(cfg.encoder);

  std::vector<diffusion::PretrainItem> dataset;
  dataset.reserve(tasks.size());
  for (const auto& task : tasks) {
    diffusion::PretrainItem item;
    item.x0 = task.native.onehot;
    item.h_scalar = feat::encode_structure(feat::build_graph(task.target, cfg.graph_k), encoder)
                        .scalar;
    dataset.push_back(std::move(item));
  }

  policy::FeatureSpec spec;
  spec.h_dim = cfg.encoder.hidden_scalar;
  const auto initial =
      policy::PolicyParams::seeded(spec, cfg.pretrain.param_seed, cfg.pretrain.init_std);

  diffusion::PretrainRunConfig run_cfg;
  run_cfg.iters = iters_flag.value_or(cfg.pretrain.iters);
  run_cfg.batch = cfg.pretrain.batch;
  run_cfg.learning_rate = cfg.pretrain.learning_rate;

  Rng rng(resolve_seed(seed_flag, cfg));
  const auto result = diffusion::run_pretraining(initial, dataset, run_cfg, cfg.schedule, rng);

  write_file(out_ckpt, policy::to_checkpoint_json(result.params) + "\n");
  if (!loss_log.empty()) {
    std::string lines;
    char buf[96];
    for (std::size_t i = 0; i < result.losses.size(); ++i) {
      std::snprintf(buf, sizeof(buf), "{\"iter\":%zu,\"loss\":%.10g}\n", i, result.losses[i]);
      lines += buf;
    }
    write_file(loss_log, lines);
  }
  std::cerr << "pretrained " << run_cfg.iters << " iterations on " << tasks.size()
            << " tasks -> " << out_ckpt << "\n";
  return 0;
}

int run_train_rl(config::RunConfig cfg, const std::string& in_ckpt, const std::string& out_ckpt,
                 const std::string& log_path, const std::string& baseline_mode,
                 std::optional<int> epochs_flag, const std::optional<std::uint64_t>& seed_flag,
                 bool timing) {
  if (!baseline_mode.empty())
    cfg.rl.baseline_mode = rl::baseline_mode_from_string(baseline_mode);
  if (epochs_flag) cfg.rl.epochs = *epochs_flag;
  cfg.rl.reward = cfg.reward;

  const auto params = load_checkpoint_for(cfg, in_ckpt);
  const auto oracle_ptr = make_oracle(cfg);
  if (!oracle_ptr) throw ConfigError("train-rl requires oracle.kind helix or subprocess");

  const auto tasks = config::make_synthetic_tasks(cfg);
  std::vector<io::BackboneStructure> targets;
  std::vector<std::string> ids;
  for (const auto& task : tasks) {
    targets.push_back(task.target);
    ids.push_back(task.id);
  }
  const auto contexts = rl::make_target_contexts(
      targets, feat::make_encoder_params(cfg.encoder), cfg.graph_k, ids);

  std::ofstream log;
  if (!log_path.empty()) {
    log.open(log_path);
    if (!log) throw ParseError("cannot write '" + log_path + "'");
  }

  Rng rng(resolve_seed(seed_flag, cfg));
  const auto result =
      rl::train(cfg.rl, contexts, *oracle_ptr, params, cfg.schedule, rng,
                [&](const rl::EpochLogEntry& e) {
                  const std::string line = epoch_log_line(e, timing);
                  if (log) log << line << "\n";
                  std::cerr << "epoch " << e.epoch << " mean_reward " << e.mean_reward << "\n";
                });

  write_file(out_ckpt, policy::to_checkpoint_json(result.params) + "\n");
  return 0;
}

int run_reward(const config::RunConfig& cfg, const std::string& metrics_path,
               const std::string& base_kind) {
  rewards::RewardConfig rc = cfg.reward;
  if (!base_kind.empty()) rc.base_kind = rewards::base_kind_from_string(base_kind);
  const auto report = metrics::report_from_json(read_file(metrics_path));
  char buf[160];
  std::snprintf(buf, sizeof(buf), "{\"base\":%.10g,\"bonus\":%.10g,\"total\":%.10g}",
                rewards::base_reward(rc, report), rewards::bonus_reward(rc, report),
                rewards::total_reward(rc, report));
  std::cout << buf << "\n";
  return 0;
}

int run_fold(const config::RunConfig& cfg, std::string seq, const std::string& fasta_path,
             const std::string& out_pdb) {
  if (seq.empty() && fasta_path.empty())
    throw ConfigError("fold needs --seq or --fasta");
  if (seq.empty()) seq = io::read_fasta_first(read_file(fasta_path));
  const auto oracle_ptr = make_oracle(cfg);
  if (!oracle_ptr) throw ConfigError("fold requires oracle.kind helix or subprocess");
  const auto structure = oracle_ptr->fold(seq);
  const std::string pdb = io::to_pdb(structure);
  if (!out_pdb.empty())
    write_file(out_pdb, pdb);
  else
    std::cout << pdb;
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"RNA inverse design: structural metrics, diffusion sampling and RL fine-tuning"};
  app.require_subcommand(1);
  app.fallthrough();  // let --config/--seed appear after the subcommand too

  std::string config_path;
  app.add_option("--config", config_path, "Run configuration file (key = value lines)");

  std::optional<std::uint64_t> seed_flag;
  app.add_option("--seed", seed_flag, "Random seed (overrides config and RIDER_SEED)");

  // score
  auto* score = app.add_subcommand("score", "Structural similarity of two backbones");
  std::string score_a, score_b, score_json;
  score->add_option("pdb_a", score_a)->required();
  score->add_option("pdb_b", score_b)->required();
  score->add_option("--json", score_json, "Also write the report to this file");

  // featurize
  auto* featurize = app.add_subcommand("featurize", "k-NN graph features of a backbone");
  std::string feat_pdb, feat_dump;
  std::size_t feat_k = 32;
  bool feat_pad = false;
  featurize->add_option("pdb", feat_pdb)->required();
  featurize->add_option("--dump-json", feat_dump, "Write the graph dump to this file");
  featurize->add_option("-k,--neighbors", feat_k, "Neighbors per node");
  featurize->add_flag("--pad-parity", feat_pad, "Zero-pad edge scalars to the 131-dim layout");

  // sample
  auto* sample = app.add_subcommand("sample", "Generate sequences for a target backbone");
  std::string sample_ckpt, sample_target, sample_fasta, sample_metrics;
  int sample_n = 16;
  double sample_temp = -1.0;
  sample->add_option("--checkpoint", sample_ckpt)->required();
  sample->add_option("--target", sample_target)->required();
  sample->add_option("-n,--n", sample_n, "Number of designs");
  sample->add_option("--temperature", sample_temp, "Sampling temperature (default from config)");
  sample->add_option("--out-fasta", sample_fasta, "Write FASTA here instead of stdout");
  sample->add_option("--out-metrics", sample_metrics, "Write per-design metrics JSONL here");

  // pretrain
  auto* pretrain = app.add_subcommand("pretrain", "Noise-prediction pretraining on synthetic tasks");
  std::string pre_out = "checkpoint.json", pre_loss_log;
  std::optional<int> pre_iters;
  pretrain->add_option("--out", pre_out, "Checkpoint output path");
  pretrain->add_option("--loss-log", pre_loss_log, "Per-iteration loss JSONL");
  pretrain->add_option("--iters", pre_iters, "Override pretrain.iters");

  // train-rl
  auto* train = app.add_subcommand("train-rl", "Policy-gradient fine-tuning against the oracle");
  std::string rl_in, rl_out = "checkpoint_rl.json", rl_log, rl_mode;
  std::optional<int> rl_epochs;
  bool rl_timing = false;
  train->add_option("--checkpoint", rl_in)->required();
  train->add_option("--out", rl_out, "Fine-tuned checkpoint output path");
  train->add_option("--log", rl_log, "Epoch log JSONL");
  train->add_option("--baseline-mode", rl_mode, "reward | batch | moving");
  train->add_option("--epochs", rl_epochs, "Override rl.epochs");
  train->add_flag("--timing", rl_timing, "Record real wall_ms in the epoch log");

  // reward
  auto* reward = app.add_subcommand("reward", "Reward of a metrics report");
  std::string reward_metrics, reward_kind;
  reward->add_option("--metrics", reward_metrics)->required();
  reward->add_option("--base-kind", reward_kind, "tm | gdt | rmsd | gdt_rmsd");

  // fold
  auto* fold = app.add_subcommand("fold", "Fold a sequence with the configured oracle");
  std::string fold_seq, fold_fasta, fold_out;
  fold->add_option("--seq", fold_seq, "Sequence letters (ACGU)");
  fold->add_option("--fasta", fold_fasta, "Read the sequence from this FASTA file");
  fold->add_option("--out", fold_out, "Write the structure here instead of stdout");

  // config
  auto* config_cmd = app.add_subcommand("config", "Show configuration");
  bool config_defaults = false;
  config_cmd->add_flag("--defaults", config_defaults, "Print the built-in defaults");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;  // usage errors collapse to exit 1
  }

  try {
    const config::RunConfig cfg = load_config_or_default(config_path);
    if (score->parsed()) return run_score(score_a, score_b, score_json);
    if (featurize->parsed()) return run_featurize(feat_pdb, feat_dump, feat_k, feat_pad);
    if (sample->parsed()) {
      const double temp = sample_temp >= 0.0 ? sample_temp : cfg.sampler.temperature;
      return run_sample(cfg, sample_ckpt, sample_target, sample_n, temp, seed_flag, sample_fasta,
                        sample_metrics);
    }
    if (pretrain->parsed()) return run_pretrain(cfg, pre_out, pre_loss_log, seed_flag, pre_iters);
    if (train->parsed())
      return run_train_rl(cfg, rl_in, rl_out, rl_log, rl_mode, rl_epochs, seed_flag, rl_timing);
    if (reward->parsed()) return run_reward(cfg, reward_metrics, reward_kind);
    if (fold->parsed()) return run_fold(cfg, fold_seq, fold_fasta, fold_out);
    if (config_cmd->parsed()) {
      if (config_defaults) {
        config::RunConfig defaults;
        std::cout << config::dump_run_config(defaults);
      } else {
        std::cout << config::dump_run_config(cfg);
      }
      return 0;
    }
  } catch (const UpdateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const BatchError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const StateError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
