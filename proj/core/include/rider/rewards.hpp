#pragma once

#include <string>

#include "rider/errors.hpp"
#include "rider/metrics.hpp"

namespace rider::rewards {

enum class BaseKind { tm, gdt, rmsd, gdt_rmsd };

BaseKind base_kind_from_string(const std::string& s);  // throws ConfigError
std::string to_string(BaseKind kind);

/// Scaling factors and designability thresholds of the reward family.
struct RewardConfig {
  double w_gdt_scale = 5.0;
  double w_tm_scale = 5.0;
  double w_rmsd_scale = 0.5;
  double w_bonus_gdt = 100.0;
  double w_bonus_rmsd = 20.0;
  double tau_gdt = 0.5;
  double tau_rmsd = 2.0;
  BaseKind base_kind = BaseKind::gdt_rmsd;

  void validate() const;  // throws ConfigError
};

/// Squared scaled metric (negated for the RMSD term) per the selected kind.
double base_reward(const RewardConfig& cfg, const metrics::MetricsReport& m);

/// Designability bonus; the GDT branch takes precedence over the RMSD branch,
/// both with strict inequalities, otherwise 0.
double bonus_reward(const RewardConfig& cfg, const metrics::MetricsReport& m);

double total_reward(const RewardConfig& cfg, const metrics::MetricsReport& m);

}  // namespace rider::rewards
