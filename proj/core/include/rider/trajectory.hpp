#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rider/struct_io.hpp"

namespace rider::diffusion {

/// One reverse-diffusion transition: state, times, sampled action and its
/// log density under the sampling policy.
struct StepRecord {
  Eigen::MatrixXd x_t;      // state before the step, N x 4
  double t_k = 0.0;
  double t_km1 = 0.0;
  Eigen::MatrixXd action;   // x_{t_km1}, N x 4
  double log_prob_old = 0.0;
};

/// Full denoising rollout plus its terminal reward; the RL experience unit.
struct DenoisingTrajectory {
  std::vector<StepRecord> steps;
  Eigen::MatrixXd final_x0_hat;  // clean-sequence estimate from the last step
  io::RnaSequence final_sequence;
  double reward = 0.0;
  double temperature = 0.0;
  std::string target_id;
  std::size_t target_index = 0;
};

}  // namespace rider::diffusion
