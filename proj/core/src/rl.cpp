#include "rider/rl.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <optional>
#include <thread>

#include "rider/metrics.hpp"

namespace rider::rl {

BaselineMode baseline_mode_from_string(const std::string& s) {
  if (s == "reward") return BaselineMode::reward;
  if (s == "batch") return BaselineMode::batch;
  if (s == "moving") return BaselineMode::moving;
  throw ConfigError("unknown baseline mode '" + s + "' (want reward|batch|moving)");
}

std::string to_string(BaselineMode mode) {
  switch (mode) {
    case BaselineMode::reward: return "reward";
    case BaselineMode::batch: return "batch";
    case BaselineMode::moving: return "moving";
  }
  return "moving";
}

void RlConfig::validate() const {
  if (epochs < 0) throw ConfigError("rl.epochs must be >= 0");
  if (updates_per_epoch < 1) throw ConfigError("rl.updates_per_epoch must be >= 1");
  if (batch_size < 2) throw ConfigError("rl.batch_size must be >= 2");
  if (!(clip_eps > 0.0)) throw ConfigError("rl.clip_eps must be > 0");
  if (!(learning_rate > 0.0)) throw ConfigError("rl.learning_rate must be > 0");
  if (!(max_grad_norm > 0.0)) throw ConfigError("rl.max_grad_norm must be > 0");
  if (n_steps_rl < 1) throw ConfigError("rl.n_steps must be >= 1");
  if (!(beta_baseline >= 0.0 && beta_baseline < 1.0))
    throw ConfigError("rl.beta_baseline must lie in [0, 1)");
  if (temperature_set.empty()) throw ConfigError("rl.temperature_set must be non-empty");
  for (double t : temperature_set)
    if (!(t > 0.0)) throw ConfigError("rl.temperature_set entries must be > 0");
  if (n_workers < 1) throw ConfigError("rl.n_workers must be >= 1");
  if (!(max_drop_fraction >= 0.0 && max_drop_fraction < 1.0))
    throw ConfigError("rl.max_drop_fraction must lie in [0, 1)");
  reward.validate();
}

std::vector<TargetContext> make_target_contexts(const std::vector<io::BackboneStructure>& targets,
                                                const feat::EncoderParams& encoder,
                                                std::size_t k_neighbors,
                                                const std::vector<std::string>& ids) {
  if (targets.empty()) throw ConfigError("need at least one target structure");
  std::vector<TargetContext> out;
  out.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    TargetContext ctx;
    ctx.structure = targets[i];
    ctx.h_scalar = feat::encode_structure(feat::build_graph(targets[i], k_neighbors), encoder)
                       .scalar;
    ctx.id = i < ids.size() ? ids[i] : ("target_" + std::to_string(i));
    out.push_back(std::move(ctx));
  }
  return out;
}

std::vector<diffusion::DenoisingTrajectory> collect_batch(
    const policy::PolicySnapshot& snapshot, const std::vector<TargetContext>& targets,
    const oracle::FoldingOracle& oracle, const RlConfig& cfg,
    const diffusion::NoiseSchedule& sched, Rng& rng, std::size_t* dropped_out) {
  if (targets.empty()) throw ConfigError("collect_batch needs at least one target");

  const std::uint64_t batch_stream = rng.next_u64();
  const Rng base(batch_stream);

  std::vector<std::optional<diffusion::DenoisingTrajectory>> slots(
      static_cast<std::size_t>(cfg.batch_size));

  auto run_trajectory = [&](int m) {
    Rng stream = base.derive(static_cast<std::uint64_t>(m));
    const std::size_t target_index = static_cast<std::size_t>(m) % targets.size();
    const TargetContext& target = targets[target_index];

    // First visit to each target is the deterministic rollout; later visits
    // draw from the temperature mixture. The draw happens on the trajectory's
    // own stream either way so streams stay aligned across worker counts.
    const std::size_t mix_index = stream.uniform_index(cfg.temperature_set.size());
    const bool deterministic = static_cast<std::size_t>(m) < targets.size();
    const double tau = deterministic ? 0.0 : cfg.temperature_set[mix_index];

    auto [seq, traj] = diffusion::sample_sequence(snapshot.params(), target.h_scalar,
                                                  cfg.n_steps_rl, tau, sched, stream);
    traj.target_id = target.id;
    traj.target_index = target_index;
    try {
      const io::BackboneStructure folded = oracle.fold(seq.letters);
      traj.reward = rewards::total_reward(cfg.reward, metrics::metrics_report(folded,
                                                                              target.structure));
      slots[static_cast<std::size_t>(m)] = std::move(traj);
    } catch (const OracleError&) {
      // dropped; slot stays empty
    }
  };

  if (cfg.n_workers <= 1) {
    for (int m = 0; m < cfg.batch_size; ++m) run_trajectory(m);
  } else {
    std::vector<std::thread> workers;
    std::atomic<int> next{0};
    const int n_workers = std::min(cfg.n_workers, cfg.batch_size);
    workers.reserve(static_cast<std::size_t>(n_workers));
    for (int w = 0; w < n_workers; ++w) {
      workers.emplace_back([&] {
        int m = 0;
        while ((m = next.fetch_add(1)) < cfg.batch_size) run_trajectory(m);
      });
    }
    for (auto& t : workers) t.join();
  }

  std::vector<diffusion::DenoisingTrajectory> batch;
  batch.reserve(static_cast<std::size_t>(cfg.batch_size));
  std::size_t dropped = 0;
  for (auto& slot : slots) {
    if (slot)
      batch.push_back(std::move(*slot));
    else
      ++dropped;
  }
  if (dropped_out) *dropped_out = dropped;
  if (static_cast<double>(dropped) > cfg.max_drop_fraction * cfg.batch_size)
    throw BatchError("oracle dropped " + std::to_string(dropped) + " of " +
                     std::to_string(cfg.batch_size) + " trajectories");
  return batch;
}

double batch_baseline(const std::vector<double>& rewards) {
  if (rewards.empty()) throw ConfigError("cannot average an empty reward batch");
  double sum = 0.0;
  for (double r : rewards) sum += r;
  return sum / static_cast<double>(rewards.size());
}

BaselineState update_moving_baseline(const BaselineState& state, double batch_mean) {
  BaselineState next = state;
  if (!state.initialized) {
    next.b = batch_mean;
    next.initialized = true;
  } else {
    next.b = state.beta_baseline * state.b + (1.0 - state.beta_baseline) * batch_mean;
  }
  return next;
}

double clipped_objective(double ratio, double adv, double clip_eps) {
  const double clipped = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps);
  return std::min(ratio * adv, clipped * adv);
}

ObjectiveEval clipped_surrogate(const policy::PolicyParams& params,
                                const std::vector<diffusion::DenoisingTrajectory>& batch,
                                const std::vector<TargetContext>& targets,
                                const std::vector<double>& per_target_baseline,
                                const RlConfig& cfg, const diffusion::NoiseSchedule& sched) {
  if (batch.empty()) throw ConfigError("policy update needs a non-empty batch");
  if (per_target_baseline.size() != targets.size())
    throw ConfigError("need one baseline per target");

  ObjectiveEval out;
  out.grad = policy::PolicyGrad::zeros(params.spec);
  std::size_t clipped_terms = 0, total_terms = 0;

  for (const auto& traj : batch) {
    if (traj.temperature <= 0.0) continue;  // baseline-only trajectories
    const Eigen::MatrixXd& h = targets.at(traj.target_index).h_scalar;
    const double adv = advantage(traj.reward, per_target_baseline[traj.target_index]);
    ++out.n_gradient_trajectories;

    for (const auto& step : traj.steps) {
      const policy::LogProbGrad lp =
          policy::grad_log_prob(params, step, traj.temperature, h, sched);
      const double ratio = std::exp(lp.log_prob - step.log_prob_old);
      out.objective += clipped_objective(ratio, adv, cfg.clip_eps);
      ++total_terms;
      if (std::abs(ratio - 1.0) > cfg.clip_eps) ++clipped_terms;

      // The min passes gradient only through the unclipped branch.
      const double clipped = std::clamp(ratio, 1.0 - cfg.clip_eps, 1.0 + cfg.clip_eps);
      if (ratio * adv <= clipped * adv) {
        const double coef = adv * ratio;
        out.grad.w += coef * lp.grad.w;
        out.grad.b += coef * lp.grad.b;
      }
    }
  }

  if (out.n_gradient_trajectories > 0) {
    const double inv = 1.0 / static_cast<double>(out.n_gradient_trajectories);
    out.objective *= inv;
    out.grad.w *= inv;
    out.grad.b *= inv;
  }
  out.clip_fraction =
      total_terms > 0 ? static_cast<double>(clipped_terms) / static_cast<double>(total_terms) : 0.0;
  return out;
}

UpdateStats policy_update(policy::PolicyParams& params,
                          const std::vector<diffusion::DenoisingTrajectory>& batch,
                          const std::vector<TargetContext>& targets,
                          const std::vector<double>& per_target_baseline, const RlConfig& cfg,
                          const diffusion::NoiseSchedule& sched, policy::AdamOptimizer& adam) {
  ObjectiveEval eval =
      clipped_surrogate(params, batch, targets, per_target_baseline, cfg, sched);

  if (!eval.grad.w.allFinite() || !eval.grad.b.allFinite())
    throw UpdateError("non-finite policy gradient (objective " + std::to_string(eval.objective) +
                      ", " + std::to_string(eval.n_gradient_trajectories) + " trajectories)");

  UpdateStats stats;
  stats.objective = eval.objective;
  stats.clip_fraction = eval.clip_fraction;
  stats.n_gradient_trajectories = eval.n_gradient_trajectories;
  stats.grad_norm = std::sqrt(eval.grad.squared_norm());

  if (stats.grad_norm > cfg.max_grad_norm && stats.grad_norm > 0.0) {
    const double scale = cfg.max_grad_norm / stats.grad_norm;
    eval.grad.w *= scale;
    eval.grad.b *= scale;
  }

  // Ascend the surrogate: feed Adam the negated gradient.
  eval.grad.w = -eval.grad.w;
  eval.grad.b = -eval.grad.b;
  adam.apply_descent(params, eval.grad, cfg.learning_rate);

  if (!params.w.allFinite() || !params.b.allFinite())
    throw UpdateError("policy parameters became non-finite after the update");
  return stats;
}

TrainResult train(const RlConfig& cfg, const std::vector<TargetContext>& targets,
                  const oracle::FoldingOracle& oracle, const policy::PolicyParams& initial,
                  const diffusion::NoiseSchedule& sched, Rng& rng,
                  const std::function<void(const EpochLogEntry&)>& on_epoch) {
  cfg.validate();
  TrainResult result;
  result.params = initial;
  result.baseline_states.resize(targets.size());
  for (auto& state : result.baseline_states) state.beta_baseline = cfg.beta_baseline;

  policy::AdamOptimizer adam(initial.spec);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const policy::PolicySnapshot snapshot(result.params, epoch);
    const auto batch = collect_batch(snapshot, targets, oracle, cfg, sched, rng);

    std::vector<double> rewards;
    rewards.reserve(batch.size());
    for (const auto& traj : batch) rewards.push_back(traj.reward);
    const double mean_reward = batch_baseline(rewards);

    // Per-target batch means; targets with no surviving trajectory keep
    // their previous baseline.
    std::vector<std::vector<double>> target_rewards(targets.size());
    for (const auto& traj : batch) target_rewards[traj.target_index].push_back(traj.reward);

    std::vector<double> per_target_baseline(targets.size(), 0.0);
    for (std::size_t k = 0; k < targets.size(); ++k) {
      const bool has = !target_rewards[k].empty();
      const double target_mean = has ? batch_baseline(target_rewards[k]) : 0.0;
      switch (cfg.baseline_mode) {
        case BaselineMode::reward:
          per_target_baseline[k] = 0.0;  // raw-reward ablation arm
          break;
        case BaselineMode::batch:
          per_target_baseline[k] = has ? target_mean : 0.0;
          break;
        case BaselineMode::moving:
          if (has)
            result.baseline_states[k] =
                update_moving_baseline(result.baseline_states[k], target_mean);
          per_target_baseline[k] = result.baseline_states[k].b;
          break;
      }
    }

    EpochLogEntry entry;
    entry.epoch = epoch;
    entry.mean_reward = mean_reward;
    double baseline_sum = 0.0;
    for (double b : per_target_baseline) baseline_sum += b;
    entry.baseline = baseline_sum / static_cast<double>(per_target_baseline.size());
    double abs_adv = 0.0;
    for (const auto& traj : batch)
      abs_adv += std::abs(advantage(traj.reward, per_target_baseline[traj.target_index]));
    entry.mean_abs_adv = abs_adv / static_cast<double>(batch.size());

    entry.per_target_mean_reward.assign(targets.size(), 0.0);
    for (std::size_t k = 0; k < targets.size(); ++k)
      if (!target_rewards[k].empty()) entry.per_target_mean_reward[k] = batch_baseline(target_rewards[k]);

    double clip_frac_sum = 0.0;
    for (int u = 0; u < cfg.updates_per_epoch; ++u) {
      const UpdateStats stats = policy_update(result.params, batch, targets,
                                              per_target_baseline, cfg, sched, adam);
      clip_frac_sum += stats.clip_fraction;
      entry.update_objectives.push_back(stats.objective);
    }
    entry.clip_frac = clip_frac_sum / cfg.updates_per_epoch;
    entry.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                              t0)
                        .count();
    result.log.push_back(entry);
    if (on_epoch) on_epoch(entry);
  }
  return result;
}

}  // namespace rider::rl
