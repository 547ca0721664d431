#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rider/featurize.hpp"
#include "rider/oracle.hpp"
#include "rider/rl.hpp"
#include "rider/schedule.hpp"

namespace rider::config {

/// Everything a run needs, grouped by section prefix. Defaults mirror the
/// published training tables; every field can be overridden from a flat
/// key = value file (lines beginning with # are comments, unknown keys are
/// rejected).
struct RunConfig {
  diffusion::NoiseSchedule schedule;

  struct Sampler {
    int n_steps = 50;
    double temperature = 0.1;
  } sampler;

  rl::RlConfig rl;
  rewards::RewardConfig reward;  // shared with rl.reward on load

  feat::EncoderConfig encoder;
  std::size_t graph_k = 32;

  struct Pretrain {
    int iters = 500;
    int batch = 16;
    double learning_rate = 3e-4;
    std::uint64_t param_seed = 42;
    double init_std = 0.02;
  } pretrain;

  struct Tasks {
    int count = 5;
    int length = 20;
    std::uint64_t seed = 1;
  } tasks;

  struct Oracle {
    std::string kind = "helix";  // helix | subprocess
    std::string command;
    std::string workdir = ".";
    double timeout_s = 60.0;
    int pool_size = 1;
  } oracle;

  std::uint64_t seed = 0;
  bool seed_set = false;

  void validate() const;  // throws ConfigError
};

/// Parse `section.key = value` lines; unknown keys throw ConfigError.
RunConfig parse_run_config(const std::string& text);
RunConfig load_run_config(const std::string& path);

/// All keys with their current values, one per line, parseable back.
std::string dump_run_config(const RunConfig& cfg);

/// Deterministic random task set (native sequences of tasks.length over ACGU).
std::vector<oracle::Task> make_synthetic_tasks(const RunConfig& cfg,
                                               const oracle::HelixOracleParams& params = {});

}  // namespace rider::config
