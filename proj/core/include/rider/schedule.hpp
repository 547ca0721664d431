#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "rider/errors.hpp"

namespace rider::diffusion {

/// Linear variance-preserving noise schedule.
struct NoiseSchedule {
  double beta0 = 0.1;
  double beta1 = 20.0;
  double t_final = 1.0;
  double eps_time = 0.001;
};

struct ScheduleValues {
  double alpha = 1.0;
  double sigma = 0.0;
  double lambda = std::numeric_limits<double>::infinity();
};

/// alpha_t, sigma_t and log-SNR lambda_t. The beta integral is closed form:
/// beta0*t + (beta1-beta0)*t^2/2. At t = 0 the log-SNR is +inf.
inline ScheduleValues alpha_sigma(const NoiseSchedule& sched, double t) {
  if (t < 0.0 || t > sched.t_final)
    throw RangeError("diffusion time " + std::to_string(t) + " outside [0, " +
                     std::to_string(sched.t_final) + "]");
  const double integral = sched.beta0 * t + 0.5 * (sched.beta1 - sched.beta0) * t * t;
  ScheduleValues v;
  const double alpha_sq = std::exp(-integral);
  v.alpha = std::sqrt(alpha_sq);
  const double sigma_sq = 1.0 - alpha_sq;
  v.sigma = std::sqrt(std::max(sigma_sq, 0.0));
  v.lambda = sigma_sq > 0.0 ? std::log(alpha_sq / sigma_sq)
                            : std::numeric_limits<double>::infinity();
  return v;
}

/// Sampling times from t_final down to eps_time, uniformly spaced;
/// steps[k] = eps + (T - eps) * k / n_steps, traversed from k = n_steps to 0.
struct TimeGrid {
  std::vector<double> steps;
  int n_steps = 0;

  static TimeGrid uniform(const NoiseSchedule& sched, int n_steps) {
    if (n_steps < 1) throw ConfigError("time grid needs at least 1 step");
    TimeGrid g;
    g.n_steps = n_steps;
    g.steps.resize(static_cast<std::size_t>(n_steps) + 1);
    for (int k = 0; k <= n_steps; ++k)
      g.steps[static_cast<std::size_t>(k)] =
          sched.eps_time + (sched.t_final - sched.eps_time) * k / n_steps;
    return g;
  }
};

/// Std floor for the reported action density (keeps log-densities finite at
/// temperature 0).
constexpr double kSigmaMin = 1e-4;

/// Coefficients of one DDIM transition from t_k to t_km1 at temperature tau:
///   mean = x_coef * x_tk + eps_coef * eps_hat
///   sample = mean + sample_std * z
/// density is a diagonal Gaussian with std density_std >= kSigmaMin.
/// The mean and sampling noise use the unclamped tau-scaled posterior std so
/// that tau = 0 is the exact deterministic DDIM update; only the reported
/// density clamps.
struct DdimMoments {
  double x_coef = 0.0;
  double eps_coef = 0.0;
  double sample_std = 0.0;
  double density_std = kSigmaMin;
  double alpha_km1 = 1.0;
  double alpha_k = 1.0;
  double sigma_k = 0.0;
};

inline DdimMoments ddim_moments(const NoiseSchedule& sched, double t_k, double t_km1,
                                double tau) {
  if (!(t_k > t_km1) || t_km1 < sched.eps_time)
    throw RangeError("ddim step times must satisfy t_k > t_km1 >= eps_time");
  const ScheduleValues at_k = alpha_sigma(sched, t_k);
  const ScheduleValues at_km1 = alpha_sigma(sched, t_km1);

  const double alpha_ratio_sq = (at_k.alpha * at_k.alpha) / (at_km1.alpha * at_km1.alpha);
  const double posterior_std =
      (at_k.sigma > 0.0) ? (at_km1.sigma / at_k.sigma) * std::sqrt(std::max(1.0 - alpha_ratio_sq, 0.0))
                         : 0.0;
  const double injected = tau * posterior_std;

  DdimMoments m;
  m.alpha_km1 = at_km1.alpha;
  m.alpha_k = at_k.alpha;
  m.sigma_k = at_k.sigma;
  // x_hat0 = (x - sigma_k eps)/alpha_k; mean = alpha_km1 x_hat0 + dir * eps.
  const double dir = std::sqrt(std::max(at_km1.sigma * at_km1.sigma - injected * injected, 0.0));
  m.x_coef = at_km1.alpha / at_k.alpha;
  m.eps_coef = dir - at_km1.alpha * at_k.sigma / at_k.alpha;
  m.sample_std = injected;
  m.density_std = std::max(injected, kSigmaMin);
  return m;
}

/// Log density of a scalar normal observation.
inline double normal_log_pdf(double x, double mean, double stddev) {
  static const double kLogSqrt2Pi = 0.5 * std::log(2.0 * M_PI);
  const double z = (x - mean) / stddev;
  return -0.5 * z * z - std::log(stddev) - kLogSqrt2Pi;
}

}  // namespace rider::diffusion
