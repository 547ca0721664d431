#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rider/diffusion.hpp"
#include "rider/errors.hpp"
#include "rider/featurize.hpp"
#include "rider/oracle.hpp"
#include "rider/policy.hpp"
#include "rider/rewards.hpp"
#include "rider/rng.hpp"
#include "rider/trajectory.hpp"

namespace rider::rl {

/// Exponential-moving-average reward baseline, seeded by the first batch mean.
struct BaselineState {
  double b = 0.0;
  double beta_baseline = 0.9;
  bool initialized = false;
};

enum class BaselineMode { reward, batch, moving };
BaselineMode baseline_mode_from_string(const std::string& s);
std::string to_string(BaselineMode mode);

struct RlConfig {
  int epochs = 80;
  int updates_per_epoch = 2;
  int batch_size = 60;
  double clip_eps = 0.5;
  double learning_rate = 5e-5;
  double max_grad_norm = 1.0;
  int n_steps_rl = 30;
  double beta_baseline = 0.9;
  std::vector<double> temperature_set = {0.1, 0.3, 0.5, 0.7, 0.9};
  BaselineMode baseline_mode = BaselineMode::moving;
  int n_workers = 1;
  double max_drop_fraction = 0.5;
  rewards::RewardConfig reward;

  void validate() const;  // throws ConfigError
};

/// Target structure with its precomputed (frozen-encoder) conditioning.
struct TargetContext {
  io::BackboneStructure structure;
  Eigen::MatrixXd h_scalar;
  std::string id;
};

/// Build contexts once per run; the encoder is frozen so conditioning is
/// reusable across every epoch.
std::vector<TargetContext> make_target_contexts(const std::vector<io::BackboneStructure>& targets,
                                                const feat::EncoderParams& encoder,
                                                std::size_t k_neighbors,
                                                const std::vector<std::string>& ids = {});

/// Collect batch_size trajectories under the snapshot policy. Targets are
/// visited round-robin; the first trajectory of each target is the
/// deterministic tau = 0 rollout, the rest draw tau uniformly from the
/// temperature set. Every trajectory owns an independent RNG stream derived
/// from (rng, index), so results do not depend on worker count. Trajectories
/// whose oracle fold fails are dropped; more than max_drop_fraction dropped
/// raises BatchError.
std::vector<diffusion::DenoisingTrajectory> collect_batch(
    const policy::PolicySnapshot& snapshot, const std::vector<TargetContext>& targets,
    const oracle::FoldingOracle& oracle, const RlConfig& cfg,
    const diffusion::NoiseSchedule& sched, Rng& rng, std::size_t* dropped_out = nullptr);

/// Arithmetic mean of trajectory rewards.
double batch_baseline(const std::vector<double>& rewards);

/// EMA recursion; the first call seeds the state with the batch mean.
BaselineState update_moving_baseline(const BaselineState& state, double batch_mean);

inline double advantage(double reward_traj, double baseline) { return reward_traj - baseline; }

/// min(r A, clip(r, 1-eps, 1+eps) A).
double clipped_objective(double ratio, double adv, double clip_eps);

struct UpdateStats {
  double objective = 0.0;
  double clip_fraction = 0.0;
  double grad_norm = 0.0;      // before norm clipping
  std::size_t n_gradient_trajectories = 0;
};

/// One clipped-surrogate ascent step. Per trajectory and step the log density
/// is recomputed under the current parameters, the importance ratio formed
/// against the recorded sampling density, and the clipped terms summed over
/// steps then averaged over contributing trajectories. Baselines are held per
/// target (advantage of a trajectory subtracts its own target's baseline).
/// tau = 0 trajectories inform baselines but are excluded from the gradient.
/// The gradient norm is clipped before the Adam ascent. Throws UpdateError on
/// non-finite gradients.
UpdateStats policy_update(policy::PolicyParams& params,
                          const std::vector<diffusion::DenoisingTrajectory>& batch,
                          const std::vector<TargetContext>& targets,
                          const std::vector<double>& per_target_baseline, const RlConfig& cfg,
                          const diffusion::NoiseSchedule& sched, policy::AdamOptimizer& adam);

/// Surrogate objective (no update); exposed for gradient checking.
struct ObjectiveEval {
  double objective = 0.0;
  policy::PolicyGrad grad;
  double clip_fraction = 0.0;
  std::size_t n_gradient_trajectories = 0;
};
ObjectiveEval clipped_surrogate(const policy::PolicyParams& params,
                                const std::vector<diffusion::DenoisingTrajectory>& batch,
                                const std::vector<TargetContext>& targets,
                                const std::vector<double>& per_target_baseline,
                                const RlConfig& cfg, const diffusion::NoiseSchedule& sched);

struct EpochLogEntry {
  int epoch = 0;
  double mean_reward = 0.0;
  double baseline = 0.0;
  double clip_frac = 0.0;
  double mean_abs_adv = 0.0;
  double wall_ms = 0.0;
  std::vector<double> update_objectives;
  std::vector<double> per_target_mean_reward;  // indexed like the target list
};

struct TrainResult {
  policy::PolicyParams params;
  std::vector<EpochLogEntry> log;
  std::vector<BaselineState> baseline_states;  // one per target
};

/// Full fine-tuning loop: per epoch snapshot, collect, per-target baseline
/// update and updates_per_epoch ascent steps. Halts by rethrowing
/// UpdateError.
TrainResult train(const RlConfig& cfg, const std::vector<TargetContext>& targets,
                  const oracle::FoldingOracle& oracle, const policy::PolicyParams& initial,
                  const diffusion::NoiseSchedule& sched, Rng& rng,
                  const std::function<void(const EpochLogEntry&)>& on_epoch = nullptr);

}  // namespace rider::rl
