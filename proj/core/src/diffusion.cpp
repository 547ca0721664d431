#include "rider/diffusion.hpp"

#include <cmath>

namespace rider::diffusion {

LatentState forward_noise(const Eigen::MatrixXd& x0, double t, const Eigen::MatrixXd& eps,
                          const NoiseSchedule& sched) {
  if (x0.rows() != eps.rows() || x0.cols() != eps.cols())
    throw ShapeError("forward_noise: x0 and eps shapes disagree");
  const ScheduleValues v = alpha_sigma(sched, t);
  return LatentState{v.alpha * x0 + v.sigma * eps, t};
}

DdimStepResult ddim_step(const Eigen::MatrixXd& x_tk, const Eigen::MatrixXd& eps_hat, double t_k,
                         double t_km1, double temperature, const NoiseSchedule& sched, Rng& rng) {
  if (x_tk.rows() != eps_hat.rows() || x_tk.cols() != eps_hat.cols())
    throw ShapeError("ddim_step: latent and noise-prediction shapes disagree");
  const DdimMoments m = ddim_moments(sched, t_k, t_km1, temperature);

  DdimStepResult res;
  res.x0_hat = (x_tk - m.sigma_k * eps_hat) / m.alpha_k;
  res.action_mean = m.x_coef * x_tk + m.eps_coef * eps_hat;
  res.action_std = m.density_std;

  // The z draw always happens so the stream advances identically across
  // temperatures; at tau = 0 it is scaled away entirely.
  const Eigen::MatrixXd z = rng.normal_matrix(x_tk.rows(), x_tk.cols());
  res.x_next = res.action_mean + m.sample_std * z;

  double lp = 0.0;
  for (Eigen::Index i = 0; i < res.x_next.rows(); ++i)
    for (Eigen::Index c = 0; c < res.x_next.cols(); ++c)
      lp += normal_log_pdf(res.x_next(i, c), res.action_mean(i, c), res.action_std);
  res.log_prob = lp;
  return res;
}

std::pair<io::RnaSequence, DenoisingTrajectory> sample_sequence(
    const policy::PolicyParams& params, const Eigen::MatrixXd& h_scalar, int n_steps,
    double temperature, const NoiseSchedule& sched, Rng& rng) {
  if (h_scalar.cols() != params.spec.h_dim)
    throw ShapeError("conditioning width does not match the policy feature spec");
  const TimeGrid grid = TimeGrid::uniform(sched, n_steps);
  const Eigen::Index n = h_scalar.rows();

  DenoisingTrajectory traj;
  traj.temperature = temperature;
  traj.steps.reserve(static_cast<std::size_t>(n_steps));

  Eigen::MatrixXd x = rng.normal_matrix(n, policy::kSeqChannels);
  Eigen::MatrixXd x0_hat;
  for (int k = n_steps; k >= 1; --k) {
    const double t_k = grid.steps[static_cast<std::size_t>(k)];
    const double t_km1 = grid.steps[static_cast<std::size_t>(k) - 1];
    const Eigen::MatrixXd eps_hat = policy::predict_noise(params, x, t_k, h_scalar);
    DdimStepResult res = ddim_step(x, eps_hat, t_k, t_km1, temperature, sched, rng);

    StepRecord rec;
    rec.x_t = std::move(x);
    rec.t_k = t_k;
    rec.t_km1 = t_km1;
    rec.action = res.x_next;
    rec.log_prob_old = res.log_prob;
    traj.steps.push_back(std::move(rec));

    x = std::move(res.x_next);
    x0_hat = std::move(res.x0_hat);
  }

  traj.final_x0_hat = x0_hat;
  io::RnaSequence seq = io::sequence_to_onehot(io::decode_argmax(x0_hat));
  traj.final_sequence = seq;
  return {std::move(seq), std::move(traj)};
}

std::vector<PretrainDraw> sample_pretrain_draws(const std::vector<PretrainItem>& batch,
                                                const NoiseSchedule& sched, Rng& rng) {
  if (batch.empty()) throw ConfigError("pretrain batch is empty");
  std::vector<PretrainDraw> draws;
  draws.reserve(batch.size());
  for (const auto& item : batch) {
    PretrainDraw d;
    d.t = rng.uniform(sched.eps_time, sched.t_final);
    d.eps = rng.normal_matrix(item.x0.rows(), item.x0.cols());
    draws.push_back(std::move(d));
  }
  return draws;
}

PretrainLoss pretrain_loss_on_draws(const policy::PolicyParams& params,
                                    const std::vector<PretrainItem>& batch,
                                    const std::vector<PretrainDraw>& draws,
                                    const NoiseSchedule& sched) {
  if (batch.empty()) throw ConfigError("pretrain batch is empty");
  if (batch.size() != draws.size())
    throw ShapeError("pretrain batch and draw counts disagree");

  PretrainLoss out;
  out.grad = policy::PolicyGrad::zeros(params.spec);
  const double inv_m = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto& item = batch[i];
    const auto& draw = draws[i];
    if (item.x0.rows() != draw.eps.rows() || item.x0.cols() != draw.eps.cols())
      throw ShapeError("pretrain draw shape does not match its item");
    const LatentState xt = forward_noise(item.x0, draw.t, draw.eps, sched);
    const Eigen::MatrixXd features =
        policy::input_features(params.spec, xt.x, draw.t, item.h_scalar);
    const Eigen::MatrixXd eps_hat =
        (features * params.w.transpose()).rowwise() + params.b.transpose();
    const Eigen::MatrixXd residual = draw.eps - eps_hat;
    out.loss += inv_m * residual.squaredNorm();
    // d/dW |eps - (W f + b)|^2 = -2 residual^T f
    out.grad.w += (-2.0 * inv_m) * residual.transpose() * features;
    out.grad.b += (-2.0 * inv_m) * residual.colwise().sum().transpose();
  }
  return out;
}

PretrainLoss pretrain_loss(const policy::PolicyParams& params,
                           const std::vector<PretrainItem>& batch, const NoiseSchedule& sched,
                           Rng& rng) {
  return pretrain_loss_on_draws(params, batch, sample_pretrain_draws(batch, sched, rng), sched);
}

PretrainRunResult run_pretraining(const policy::PolicyParams& initial,
                                  const std::vector<PretrainItem>& dataset,
                                  const PretrainRunConfig& cfg, const NoiseSchedule& sched,
                                  Rng& rng) {
  if (dataset.empty()) throw ConfigError("pretraining needs at least one (sequence, h_c) pair");
  if (cfg.batch < 1) throw ConfigError("pretrain batch must be >= 1");

  PretrainRunResult result;
  result.params = initial;
  result.losses.reserve(static_cast<std::size_t>(std::max(cfg.iters, 0)));
  policy::AdamOptimizer adam(initial.spec);

  std::size_t cursor = 0;
  for (int iter = 0; iter < cfg.iters; ++iter) {
    std::vector<PretrainItem> batch;
    batch.reserve(static_cast<std::size_t>(cfg.batch));
    for (int j = 0; j < cfg.batch; ++j) {
      batch.push_back(dataset[cursor]);
      cursor = (cursor + 1) % dataset.size();
    }
    const PretrainLoss eval = pretrain_loss(result.params, batch, sched, rng);
    if (!std::isfinite(eval.loss))
      throw UpdateError("pretraining loss became non-finite at iteration " +
                        std::to_string(iter));
    adam.apply_descent(result.params, eval.grad, cfg.learning_rate);
    result.losses.push_back(eval.loss);
  }
  return result;
}

}  // namespace rider::diffusion
