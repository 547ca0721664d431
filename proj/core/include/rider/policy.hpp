#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>

#include "rider/errors.hpp"
#include "rider/rng.hpp"
#include "rider/schedule.hpp"
#include "rider/trajectory.hpp"

namespace rider::policy {

constexpr int kSeqChannels = 4;
constexpr int kTimeEmbedDim = 16;

/// Layout of the per-node input concat: (x_t)_i, t_emb, (h_c)_i scalars.
struct FeatureSpec {
  int x_dim = kSeqChannels;
  int t_dim = kTimeEmbedDim;
  int h_dim = 256;

  int input_dim() const { return x_dim + t_dim + h_dim; }
  bool operator==(const FeatureSpec&) const = default;
};

/// Affine per-node noise predictor: eps_hat_i = W . concat(...) + b.
struct PolicyParams {
  Eigen::MatrixXd w;  // 4 x input_dim
  Eigen::VectorXd b;  // 4
  FeatureSpec spec;

  static PolicyParams seeded(const FeatureSpec& spec, std::uint64_t seed = 42,
                             double init_std = 0.02);
};

/// Frozen copy of PolicyParams used as the sampling policy for one epoch.
class PolicySnapshot {
public:
  PolicySnapshot() = default;
  PolicySnapshot(const PolicyParams& params, long epoch)
      : params_(params), epoch_(epoch) {}

  const PolicyParams& params() const { return params_; }
  long epoch() const { return epoch_; }

  /// Content hash over parameter bytes; stable while the snapshot lives.
  std::uint64_t content_hash() const;

private:
  PolicyParams params_;
  long epoch_ = 0;
};

/// Gradient container matching PolicyParams.
struct PolicyGrad {
  Eigen::MatrixXd w;
  Eigen::VectorXd b;

  static PolicyGrad zeros(const FeatureSpec& spec);
  double squared_norm() const { return w.squaredNorm() + b.squaredNorm(); }
};

/// Adam with bias-corrected moments (beta1 0.9, beta2 0.999, eps 1e-8).
class AdamOptimizer {
public:
  explicit AdamOptimizer(const FeatureSpec& spec);

  /// One descent step along grad (pass the negated gradient to ascend).
  void apply_descent(PolicyParams& params, const PolicyGrad& grad, double learning_rate);

  long step_count() const { return step_; }

private:
  Eigen::MatrixXd m_w_, v_w_;
  Eigen::VectorXd m_b_, v_b_;
  long step_ = 0;
};

/// Sinusoidal embedding of t at 8 geometric frequencies, (sin, cos) interleaved.
Eigen::VectorXd time_embed(double t);

/// Per-node noise prediction for an N x 4 latent block and N x h_dim scalar
/// conditioning block.
Eigen::MatrixXd predict_noise(const PolicyParams& params, const Eigen::MatrixXd& x_t, double t,
                              const Eigen::MatrixXd& h_scalar);

/// N x input_dim feature matrix used by predict_noise (exposed for gradients).
Eigen::MatrixXd input_features(const FeatureSpec& spec, const Eigen::MatrixXd& x_t, double t,
                               const Eigen::MatrixXd& h_scalar);

/// Log density of the recorded action under the current parameters and the
/// exact gradient of that log density w.r.t. (w, b). The DDIM transition mean
/// is affine in eps_hat, which is affine in the parameters, so the chain rule
/// closes in one outer product per node. Throws StateError when the record or
/// conditioning block is malformed.
struct LogProbGrad {
  double log_prob = 0.0;
  PolicyGrad grad;
};
LogProbGrad grad_log_prob(const PolicyParams& params, const diffusion::StepRecord& step,
                          double temperature, const Eigen::MatrixXd& h_scalar,
                          const diffusion::NoiseSchedule& sched);

/// Log density only (shared path with grad_log_prob).
double log_prob(const PolicyParams& params, const diffusion::StepRecord& step, double temperature,
                const Eigen::MatrixXd& h_scalar, const diffusion::NoiseSchedule& sched);

/// Versioned JSON checkpoint; doubles round-trip bit-exactly.
std::string to_checkpoint_json(const PolicyParams& params);
PolicyParams from_checkpoint_json(const std::string& text);

}  // namespace rider::policy
