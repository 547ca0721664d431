#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rider/rewards.hpp"
#include "rider/rng.hpp"

using namespace rider;
using metrics::MetricsReport;
using rewards::BaseKind;
using rewards::RewardConfig;

namespace {

MetricsReport report(double gdt, double tm, double rmsd) {
  MetricsReport m;
  m.gdt_ts = gdt;
  m.tm_score = tm;
  m.rmsd = rmsd;
  m.n_residues = 20;
  return m;
}

RewardConfig with_kind(BaseKind kind) {
  RewardConfig cfg;
  cfg.base_kind = kind;
  return cfg;
}

}  // namespace

TEST_CASE("base reward table") {
  CHECK(rewards::base_reward(with_kind(BaseKind::gdt), report(0.6, 0, 0)) ==
        doctest::Approx(9.0).epsilon(1e-12));
  CHECK(rewards::base_reward(with_kind(BaseKind::rmsd), report(0, 0, 0)) == doctest::Approx(0.0));
  CHECK(rewards::base_reward(with_kind(BaseKind::gdt_rmsd), report(0.6, 0, 4.0)) ==
        doctest::Approx(5.0).epsilon(1e-12));
  CHECK(rewards::base_reward(with_kind(BaseKind::tm), report(0, 0.6, 0)) ==
        doctest::Approx(9.0).epsilon(1e-12));
}

TEST_CASE("bonus reward branches with strict thresholds") {
  RewardConfig cfg;
  CHECK(rewards::bonus_reward(cfg, report(0.6, 0, 100.0)) == doctest::Approx(10.0));
  CHECK(rewards::bonus_reward(cfg, report(0.3, 0, 1.5)) == doctest::Approx(10.0));
  CHECK(rewards::bonus_reward(cfg, report(0.3, 0, 5.0)) == doctest::Approx(0.0));
  // equality at either threshold yields zero (strict inequalities)
  CHECK(rewards::bonus_reward(cfg, report(0.5, 0, 5.0)) == doctest::Approx(0.0));
  CHECK(rewards::bonus_reward(cfg, report(0.3, 0, 2.0)) == doctest::Approx(0.0));
}

TEST_CASE("gdt branch takes precedence over the rmsd branch") {
  RewardConfig cfg;
  Rng rng(1);
  for (int trial = 0; trial < 200; ++trial) {
    const double gdt = 0.5 + 0.5 * rng.uniform() + 1e-9;
    const double rmsd = rng.uniform(0.0, 10.0);
    const double bonus = rewards::bonus_reward(cfg, report(gdt, 0, rmsd));
    CHECK(bonus == doctest::Approx((gdt - 0.5) * 100.0).epsilon(1e-12));
  }
}

TEST_CASE("total reward table") {
  CHECK(rewards::total_reward(with_kind(BaseKind::gdt), report(0.6, 0, 4.0)) ==
        doctest::Approx(19.0).epsilon(1e-12));
  CHECK(rewards::total_reward(with_kind(BaseKind::tm), report(0, 0, 5.0)) ==
        doctest::Approx(0.0));
  CHECK(rewards::total_reward(with_kind(BaseKind::gdt_rmsd), report(0.55, 0, 1.0)) ==
        doctest::Approx(12.3125).epsilon(1e-12));
}

TEST_CASE("monotonicity in each referenced metric") {
  // The bonus branch precedence makes the total genuinely non-monotone in
  // GDT_TS at the tau_gdt crossing while the RMSD bonus is active (the GDT
  // branch restarts at zero there), so the GDT check stays within one branch
  // regime. TM and RMSD monotonicity hold unconditionally.
  Rng rng(2);
  for (int trial = 0; trial < 300; ++trial) {
    const double gdt = rng.uniform(), tm = rng.uniform(), rmsd = rng.uniform(0.0, 12.0);
    const double dt = rng.uniform(0.0, 1.0 - tm);
    const double dr = rng.uniform(0.0, rmsd);
    const bool crosses = gdt <= 0.5;
    const double dg = crosses ? rng.uniform(0.0, 0.5 - gdt) : rng.uniform(0.0, 1.0 - gdt);

    for (auto kind : {BaseKind::tm, BaseKind::gdt, BaseKind::rmsd, BaseKind::gdt_rmsd}) {
      const auto cfg = with_kind(kind);
      const double base_val = rewards::total_reward(cfg, report(gdt, tm, rmsd));
      CHECK(rewards::total_reward(cfg, report(gdt + dg, tm, rmsd)) >= base_val - 1e-12);
      CHECK(rewards::total_reward(cfg, report(gdt, tm + dt, rmsd)) >= base_val - 1e-12);
      CHECK(rewards::total_reward(cfg, report(gdt, tm, rmsd - dr)) >= base_val - 1e-12);
      if (rmsd >= 2.0) {
        // with the RMSD bonus out of play, GDT monotonicity holds across the
        // threshold too
        CHECK(rewards::total_reward(cfg, report(std::min(1.0, gdt + 0.6), tm, rmsd)) >=
              base_val - 1e-12);
      }
    }
  }
}

TEST_CASE("bonus is continuous from above at both thresholds") {
  RewardConfig cfg;
  const double eps = 1e-10;
  CHECK(rewards::bonus_reward(cfg, report(0.5 + eps, 0, 10.0)) ==
        doctest::Approx(0.0).epsilon(1e-6));
  CHECK(rewards::bonus_reward(cfg, report(0.2, 0, 2.0 - eps)) ==
        doctest::Approx(0.0).epsilon(1e-6));
}

TEST_CASE("config validation") {
  RewardConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.tau_gdt = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = RewardConfig{};
  cfg.w_bonus_rmsd = 0.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  CHECK_THROWS_AS(rewards::base_kind_from_string("nope"), ConfigError);
  CHECK(rewards::base_kind_from_string("gdt_rmsd") == BaseKind::gdt_rmsd);
}
