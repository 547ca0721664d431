#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rider/config.hpp"

using namespace rider;

TEST_CASE("defaults mirror the training tables") {
  config::RunConfig cfg;
  CHECK(cfg.schedule.beta0 == doctest::Approx(0.1));
  CHECK(cfg.schedule.beta1 == doctest::Approx(20.0));
  CHECK(cfg.schedule.t_final == doctest::Approx(1.0));
  CHECK(cfg.schedule.eps_time == doctest::Approx(0.001));
  CHECK(cfg.sampler.n_steps == 50);
  CHECK(cfg.sampler.temperature == doctest::Approx(0.1));
  CHECK(cfg.rl.epochs == 80);
  CHECK(cfg.rl.updates_per_epoch == 2);
  CHECK(cfg.rl.batch_size == 60);
  CHECK(cfg.rl.clip_eps == doctest::Approx(0.5));
  CHECK(cfg.rl.learning_rate == doctest::Approx(5e-5));
  CHECK(cfg.rl.max_grad_norm == doctest::Approx(1.0));
  CHECK(cfg.rl.n_steps_rl == 30);
  CHECK(cfg.rl.temperature_set == std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9});
  CHECK(cfg.reward.w_gdt_scale == doctest::Approx(5.0));
  CHECK(cfg.reward.w_tm_scale == doctest::Approx(5.0));
  CHECK(cfg.reward.w_rmsd_scale == doctest::Approx(0.5));
  CHECK(cfg.reward.w_bonus_gdt == doctest::Approx(100.0));
  CHECK(cfg.reward.w_bonus_rmsd == doctest::Approx(20.0));
  CHECK(cfg.reward.tau_gdt == doctest::Approx(0.5));
  CHECK(cfg.reward.tau_rmsd == doctest::Approx(2.0));
  CHECK(cfg.encoder.layers == 5);
  CHECK(cfg.encoder.hidden_scalar == 256);
  CHECK(cfg.encoder.hidden_vector == 24);
  CHECK(cfg.graph_k == 32);
  CHECK(cfg.pretrain.learning_rate == doctest::Approx(3e-4));
}

TEST_CASE("parse, override and round-trip") {
  const std::string text =
      "# comment\n"
      "rl.batch_size = 24\n"
      "reward.base_kind = tm\n"
      "rl.temperature_set = 0.2, 0.4\n"
      "seed = 99\n";
  const auto cfg = config::parse_run_config(text);
  CHECK(cfg.rl.batch_size == 24);
  CHECK(cfg.reward.base_kind == rewards::BaseKind::tm);
  CHECK(cfg.rl.reward.base_kind == rewards::BaseKind::tm);  // mirrored into rl
  CHECK(cfg.rl.temperature_set == std::vector<double>{0.2, 0.4});
  CHECK(cfg.seed == 99);
  CHECK(cfg.seed_set);

  const auto back = config::parse_run_config(config::dump_run_config(cfg));
  CHECK(back.rl.batch_size == 24);
  CHECK(back.reward.base_kind == rewards::BaseKind::tm);
  CHECK(back.schedule.beta1 == cfg.schedule.beta1);
}

TEST_CASE("unknown keys and bad values are rejected") {
  CHECK_THROWS_AS(config::parse_run_config("nope.key = 1\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_run_config("rl.batch_size = soon\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_run_config("rl.batch_size\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_run_config("rl.batch_size = 1\n"), ConfigError);   // < 2
  CHECK_THROWS_AS(config::parse_run_config("schedule.eps_time = 2.0\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_run_config("oracle.kind = quantum\n"), ConfigError);
  CHECK_THROWS_AS(config::parse_run_config("oracle.kind = subprocess\n"), ConfigError);
}

TEST_CASE("synthetic tasks are deterministic in the task seed") {
  config::RunConfig cfg;
  cfg.tasks.count = 3;
  cfg.tasks.length = 12;
  cfg.tasks.seed = 5;
  const auto a = config::make_synthetic_tasks(cfg);
  const auto b = config::make_synthetic_tasks(cfg);
  REQUIRE(a.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(a[i].native.letters == b[i].native.letters);
    CHECK(a[i].native.letters.size() == 12);
    CHECK(a[i].target.size() == 12);
  }
  cfg.tasks.seed = 6;
  const auto c = config::make_synthetic_tasks(cfg);
  bool any_different = false;
  for (std::size_t i = 0; i < 3; ++i) any_different |= (a[i].native.letters != c[i].native.letters);
  CHECK(any_different);
}
