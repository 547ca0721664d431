#include "rider/rewards.hpp"

namespace rider::rewards {

BaseKind base_kind_from_string(const std::string& s) {
  if (s == "tm") return BaseKind::tm;
  if (s == "gdt") return BaseKind::gdt;
  if (s == "rmsd") return BaseKind::rmsd;
  if (s == "gdt_rmsd") return BaseKind::gdt_rmsd;
  throw ConfigError("unknown reward base kind '" + s + "' (want tm|gdt|rmsd|gdt_rmsd)");
}

std::string to_string(BaseKind kind) {
  switch (kind) {
    case BaseKind::tm: return "tm";
    case BaseKind::gdt: return "gdt";
    case BaseKind::rmsd: return "rmsd";
    case BaseKind::gdt_rmsd: return "gdt_rmsd";
  }
  return "gdt_rmsd";
}

void RewardConfig::validate() const {
  if (w_gdt_scale <= 0 || w_tm_scale <= 0 || w_rmsd_scale <= 0 || w_bonus_gdt <= 0 ||
      w_bonus_rmsd <= 0)
    throw ConfigError("reward scaling factors must be positive");
  if (!(tau_gdt > 0.0 && tau_gdt < 1.0)) throw ConfigError("tau_gdt must lie in (0, 1)");
  if (!(tau_rmsd > 0.0)) throw ConfigError("tau_rmsd must be positive");
}

double base_reward(const RewardConfig& cfg, const metrics::MetricsReport& m) {
  const double gdt_term = (m.gdt_ts * cfg.w_gdt_scale) * (m.gdt_ts * cfg.w_gdt_scale);
  const double tm_term = (m.tm_score * cfg.w_tm_scale) * (m.tm_score * cfg.w_tm_scale);
  const double rmsd_term = -(m.rmsd * cfg.w_rmsd_scale) * (m.rmsd * cfg.w_rmsd_scale);
  switch (cfg.base_kind) {
    case BaseKind::tm: return tm_term;
    case BaseKind::gdt: return gdt_term;
    case BaseKind::rmsd: return rmsd_term;
    case BaseKind::gdt_rmsd: return rmsd_term + gdt_term;
  }
  return 0.0;
}

double bonus_reward(const RewardConfig& cfg, const metrics::MetricsReport& m) {
  if (m.gdt_ts > cfg.tau_gdt) return (m.gdt_ts - cfg.tau_gdt) * cfg.w_bonus_gdt;
  if (m.rmsd < cfg.tau_rmsd) return (cfg.tau_rmsd - m.rmsd) * cfg.w_bonus_rmsd;
  return 0.0;
}

double total_reward(const RewardConfig& cfg, const metrics::MetricsReport& m) {
  return base_reward(cfg, m) + bonus_reward(cfg, m);
}

}  // namespace rider::rewards
