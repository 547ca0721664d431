#pragma once

#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rider/errors.hpp"
#include "rider/policy.hpp"
#include "rider/rng.hpp"
#include "rider/schedule.hpp"
#include "rider/struct_io.hpp"
#include "rider/trajectory.hpp"

namespace rider::diffusion {

struct LatentState {
  Eigen::MatrixXd x;  // N x 4
  double t = 0.0;
};

/// x_t = alpha_t x0 + sigma_t eps.
LatentState forward_noise(const Eigen::MatrixXd& x0, double t, const Eigen::MatrixXd& eps,
                          const NoiseSchedule& sched);

struct DdimStepResult {
  Eigen::MatrixXd x_next;       // x_{t_km1}
  Eigen::MatrixXd x0_hat;       // clean estimate implied by eps_hat at t_k
  Eigen::MatrixXd action_mean;  // mu_k
  double action_std = 0.0;      // density std (>= kSigmaMin)
  double log_prob = 0.0;        // log density of x_next under (mu_k, std)
};

/// One DDIM transition with temperature-scaled posterior noise. tau = 0 is the
/// exact deterministic update; the reported density std never drops below
/// kSigmaMin. Consumes N x 4 normals from rng for the noise draw.
DdimStepResult ddim_step(const Eigen::MatrixXd& x_tk, const Eigen::MatrixXd& eps_hat, double t_k,
                         double t_km1, double temperature, const NoiseSchedule& sched, Rng& rng);

/// Full reverse rollout from x_T ~ N(0, I) down the uniform time grid,
/// recording states, actions and log densities, then argmax-decoding the
/// final clean estimate.
std::pair<io::RnaSequence, DenoisingTrajectory> sample_sequence(
    const policy::PolicyParams& params, const Eigen::MatrixXd& h_scalar, int n_steps,
    double temperature, const NoiseSchedule& sched, Rng& rng);

struct PretrainItem {
  Eigen::MatrixXd x0;        // N x 4 one-hot
  Eigen::MatrixXd h_scalar;  // N x h_dim
};

/// Fixed draws for one pretraining item; exposed so gradients can be checked
/// against finite differences on identical noise.
struct PretrainDraw {
  double t = 0.0;
  Eigen::MatrixXd eps;
};

struct PretrainLoss {
  double loss = 0.0;  // mean over items of |eps - eps_hat|^2
  policy::PolicyGrad grad;
};

/// Sample (t, eps) per item.
std::vector<PretrainDraw> sample_pretrain_draws(const std::vector<PretrainItem>& batch,
                                                const NoiseSchedule& sched, Rng& rng);

/// Noise-prediction MSE and its exact parameter gradient on the given draws.
PretrainLoss pretrain_loss_on_draws(const policy::PolicyParams& params,
                                    const std::vector<PretrainItem>& batch,
                                    const std::vector<PretrainDraw>& draws,
                                    const NoiseSchedule& sched);

/// Convenience: draw (t, eps) then evaluate.
PretrainLoss pretrain_loss(const policy::PolicyParams& params,
                           const std::vector<PretrainItem>& batch, const NoiseSchedule& sched,
                           Rng& rng);

struct PretrainRunConfig {
  int iters = 500;
  int batch = 16;
  double learning_rate = 3e-4;
};

struct PretrainRunResult {
  policy::PolicyParams params;
  std::vector<double> losses;  // one entry per iteration
};

/// Supervised noise-prediction training: per iteration a minibatch of
/// (task, t, eps) draws is assembled by cycling the dataset, the MSE gradient
/// computed in closed form, and Adam descends it. Throws UpdateError if the
/// loss goes non-finite.
PretrainRunResult run_pretraining(const policy::PolicyParams& initial,
                                  const std::vector<PretrainItem>& dataset,
                                  const PretrainRunConfig& cfg, const NoiseSchedule& sched,
                                  Rng& rng);

}  // namespace rider::diffusion
