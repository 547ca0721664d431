#include "rider/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

namespace rider::config {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size() || !std::isfinite(v)) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
  }
}

long to_long(const std::string& key, const std::string& value) {
  long v = 0;
  const auto rc = std::from_chars(value.data(), value.data() + value.size(), v);
  if (rc.ec != std::errc() || rc.ptr != value.data() + value.size())
    throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  std::uint64_t v = 0;
  const auto rc = std::from_chars(value.data(), value.data() + value.size(), v);
  if (rc.ec != std::errc() || rc.ptr != value.data() + value.size())
    throw ConfigError("config key '" + key + "': expected an unsigned integer, got '" + value +
                      "'");
  return v;
}

std::vector<double> to_double_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(to_double(key, item));
  }
  if (out.empty()) throw ConfigError("config key '" + key + "': empty list");
  return out;
}

}  // namespace

void RunConfig::validate() const {
  if (!(schedule.beta1 >= schedule.beta0 && schedule.beta0 > 0.0))
    throw ConfigError("schedule requires beta1 >= beta0 > 0");
  if (!(schedule.eps_time > 0.0 && schedule.eps_time < schedule.t_final))
    throw ConfigError("schedule requires 0 < eps_time < t_final");
  if (sampler.n_steps < 1) throw ConfigError("sampler.n_steps must be >= 1");
  if (sampler.temperature < 0.0) throw ConfigError("sampler.temperature must be >= 0");
  rl.validate();
  reward.validate();
  if (encoder.layers < 1) throw ConfigError("encoder.layers must be >= 1");
  if (encoder.hidden_scalar < 1 || encoder.hidden_vector < 1)
    throw ConfigError("encoder hidden dims must be >= 1");
  if (graph_k < 1) throw ConfigError("graph.k must be >= 1");
  if (pretrain.iters < 0) throw ConfigError("pretrain.iters must be >= 0");
  if (pretrain.batch < 1) throw ConfigError("pretrain.batch must be >= 1");
  if (!(pretrain.learning_rate > 0.0)) throw ConfigError("pretrain.learning_rate must be > 0");
  if (!(pretrain.init_std > 0.0)) throw ConfigError("pretrain.init_std must be > 0");
  if (tasks.count < 1) throw ConfigError("tasks.count must be >= 1");
  if (tasks.length < 4) throw ConfigError("tasks.length must be >= 4");
  if (oracle.kind != "none" && oracle.kind != "helix" && oracle.kind != "subprocess")
    throw ConfigError("oracle.kind must be none, helix or subprocess");
  if (oracle.kind == "subprocess" && oracle.command.empty())
    throw ConfigError("oracle.command is required for the subprocess oracle");
  if (!(oracle.timeout_s > 0.0)) throw ConfigError("oracle.timeout_s must be > 0");
  if (oracle.pool_size < 1) throw ConfigError("oracle.pool_size must be >= 1");
}

RunConfig parse_run_config(const std::string& text) {
  RunConfig cfg;

  const std::map<std::string, std::function<void(const std::string&, const std::string&)>>
      setters = {
          {"schedule.beta0", [&](auto& k, auto& v) { cfg.schedule.beta0 = to_double(k, v); }},
          {"schedule.beta1", [&](auto& k, auto& v) { cfg.schedule.beta1 = to_double(k, v); }},
          {"schedule.t_final", [&](auto& k, auto& v) { cfg.schedule.t_final = to_double(k, v); }},
          {"schedule.eps_time",
           [&](auto& k, auto& v) { cfg.schedule.eps_time = to_double(k, v); }},
          {"sampler.n_steps",
           [&](auto& k, auto& v) { cfg.sampler.n_steps = static_cast<int>(to_long(k, v)); }},
          {"sampler.temperature",
           [&](auto& k, auto& v) { cfg.sampler.temperature = to_double(k, v); }},
          {"rl.epochs",
           [&](auto& k, auto& v) { cfg.rl.epochs = static_cast<int>(to_long(k, v)); }},
          {"rl.updates_per_epoch",
           [&](auto& k, auto& v) { cfg.rl.updates_per_epoch = static_cast<int>(to_long(k, v)); }},
          {"rl.batch_size",
           [&](auto& k, auto& v) { cfg.rl.batch_size = static_cast<int>(to_long(k, v)); }},
          {"rl.clip_eps", [&](auto& k, auto& v) { cfg.rl.clip_eps = to_double(k, v); }},
          {"rl.learning_rate",
           [&](auto& k, auto& v) { cfg.rl.learning_rate = to_double(k, v); }},
          {"rl.max_grad_norm",
           [&](auto& k, auto& v) { cfg.rl.max_grad_norm = to_double(k, v); }},
          {"rl.n_steps",
           [&](auto& k, auto& v) { cfg.rl.n_steps_rl = static_cast<int>(to_long(k, v)); }},
          {"rl.beta_baseline",
           [&](auto& k, auto& v) { cfg.rl.beta_baseline = to_double(k, v); }},
          {"rl.temperature_set",
           [&](auto& k, auto& v) { cfg.rl.temperature_set = to_double_list(k, v); }},
          {"rl.baseline_mode",
           [&](auto&, auto& v) { cfg.rl.baseline_mode = rl::baseline_mode_from_string(v); }},
          {"rl.n_workers",
           [&](auto& k, auto& v) { cfg.rl.n_workers = static_cast<int>(to_long(k, v)); }},
          {"reward.base_kind",
           [&](auto&, auto& v) { cfg.reward.base_kind = rewards::base_kind_from_string(v); }},
          {"reward.w_gdt_scale",
           [&](auto& k, auto& v) { cfg.reward.w_gdt_scale = to_double(k, v); }},
          {"reward.w_tm_scale",
           [&](auto& k, auto& v) { cfg.reward.w_tm_scale = to_double(k, v); }},
          {"reward.w_rmsd_scale",
           [&](auto& k, auto& v) { cfg.reward.w_rmsd_scale = to_double(k, v); }},
          {"reward.w_bonus_gdt",
           [&](auto& k, auto& v) { cfg.reward.w_bonus_gdt = to_double(k, v); }},
          {"reward.w_bonus_rmsd",
           [&](auto& k, auto& v) { cfg.reward.w_bonus_rmsd = to_double(k, v); }},
          {"reward.tau_gdt", [&](auto& k, auto& v) { cfg.reward.tau_gdt = to_double(k, v); }},
          {"reward.tau_rmsd", [&](auto& k, auto& v) { cfg.reward.tau_rmsd = to_double(k, v); }},
          {"encoder.layers",
           [&](auto& k, auto& v) { cfg.encoder.layers = static_cast<int>(to_long(k, v)); }},
          {"encoder.hidden_scalar",
           [&](auto& k, auto& v) { cfg.encoder.hidden_scalar = static_cast<int>(to_long(k, v)); }},
          {"encoder.hidden_vector",
           [&](auto& k, auto& v) { cfg.encoder.hidden_vector = static_cast<int>(to_long(k, v)); }},
          {"encoder.seed", [&](auto& k, auto& v) { cfg.encoder.seed = to_u64(k, v); }},
          {"graph.k",
           [&](auto& k, auto& v) { cfg.graph_k = static_cast<std::size_t>(to_long(k, v)); }},
          {"pretrain.iters",
           [&](auto& k, auto& v) { cfg.pretrain.iters = static_cast<int>(to_long(k, v)); }},
          {"pretrain.batch",
           [&](auto& k, auto& v) { cfg.pretrain.batch = static_cast<int>(to_long(k, v)); }},
          {"pretrain.learning_rate",
           [&](auto& k, auto& v) { cfg.pretrain.learning_rate = to_double(k, v); }},
          {"pretrain.param_seed",
           [&](auto& k, auto& v) { cfg.pretrain.param_seed = to_u64(k, v); }},
          {"pretrain.init_std",
           [&](auto& k, auto& v) { cfg.pretrain.init_std = to_double(k, v); }},
          {"tasks.count",
           [&](auto& k, auto& v) { cfg.tasks.count = static_cast<int>(to_long(k, v)); }},
          {"tasks.length",
           [&](auto& k, auto& v) { cfg.tasks.length = static_cast<int>(to_long(k, v)); }},
          {"tasks.seed", [&](auto& k, auto& v) { cfg.tasks.seed = to_u64(k, v); }},
          {"oracle.kind", [&](auto&, auto& v) { cfg.oracle.kind = v; }},
          {"oracle.command", [&](auto&, auto& v) { cfg.oracle.command = v; }},
          {"oracle.workdir", [&](auto&, auto& v) { cfg.oracle.workdir = v; }},
          {"oracle.timeout_s",
           [&](auto& k, auto& v) { cfg.oracle.timeout_s = to_double(k, v); }},
          {"oracle.pool_size",
           [&](auto& k, auto& v) { cfg.oracle.pool_size = static_cast<int>(to_long(k, v)); }},
          {"seed",
           [&](auto& k, auto& v) {
             cfg.seed = to_u64(k, v);
             cfg.seed_set = true;
           }},
      };

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped[0] == '#') continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end())
      throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    it->second(key, value);
  }

  cfg.rl.reward = cfg.reward;
  cfg.validate();
  return cfg;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("cannot open config file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return parse_run_config(text);
}

std::string dump_run_config(const RunConfig& cfg) {
  std::ostringstream out;
  out.precision(17);
  out << "schedule.beta0 = " << cfg.schedule.beta0 << "\n";
  out << "schedule.beta1 = " << cfg.schedule.beta1 << "\n";
  out << "schedule.t_final = " << cfg.schedule.t_final << "\n";
  out << "schedule.eps_time = " << cfg.schedule.eps_time << "\n";
  out << "sampler.n_steps = " << cfg.sampler.n_steps << "\n";
  out << "sampler.temperature = " << cfg.sampler.temperature << "\n";
  out << "rl.epochs = " << cfg.rl.epochs << "\n";
  out << "rl.updates_per_epoch = " << cfg.rl.updates_per_epoch << "\n";
  out << "rl.batch_size = " << cfg.rl.batch_size << "\n";
  out << "rl.clip_eps = " << cfg.rl.clip_eps << "\n";
  out << "rl.learning_rate = " << cfg.rl.learning_rate << "\n";
  out << "rl.max_grad_norm = " << cfg.rl.max_grad_norm << "\n";
  out << "rl.n_steps = " << cfg.rl.n_steps_rl << "\n";
  out << "rl.beta_baseline = " << cfg.rl.beta_baseline << "\n";
  out << "rl.temperature_set = ";
  for (std::size_t i = 0; i < cfg.rl.temperature_set.size(); ++i)
    out << (i ? "," : "") << cfg.rl.temperature_set[i];
  out << "\n";
  out << "rl.baseline_mode = " << rl::to_string(cfg.rl.baseline_mode) << "\n";
  out << "rl.n_workers = " << cfg.rl.n_workers << "\n";
  out << "reward.base_kind = " << rewards::to_string(cfg.reward.base_kind) << "\n";
  out << "reward.w_gdt_scale = " << cfg.reward.w_gdt_scale << "\n";
  out << "reward.w_tm_scale = " << cfg.reward.w_tm_scale << "\n";
  out << "reward.w_rmsd_scale = " << cfg.reward.w_rmsd_scale << "\n";
  out << "reward.w_bonus_gdt = " << cfg.reward.w_bonus_gdt << "\n";
  out << "reward.w_bonus_rmsd = " << cfg.reward.w_bonus_rmsd << "\n";
  out << "reward.tau_gdt = " << cfg.reward.tau_gdt << "\n";
  out << "reward.tau_rmsd = " << cfg.reward.tau_rmsd << "\n";
  out << "encoder.layers = " << cfg.encoder.layers << "\n";
  out << "encoder.hidden_scalar = " << cfg.encoder.hidden_scalar << "\n";
  out << "encoder.hidden_vector = " << cfg.encoder.hidden_vector << "\n";
  out << "encoder.seed = " << cfg.encoder.seed << "\n";
  out << "graph.k = " << cfg.graph_k << "\n";
  out << "pretrain.iters = " << cfg.pretrain.iters << "\n";
  out << "pretrain.batch = " << cfg.pretrain.batch << "\n";
  out << "pretrain.learning_rate = " << cfg.pretrain.learning_rate << "\n";
  out << "pretrain.param_seed = " << cfg.pretrain.param_seed << "\n";
  out << "pretrain.init_std = " << cfg.pretrain.init_std << "\n";
  out << "tasks.count = " << cfg.tasks.count << "\n";
  out << "tasks.length = " << cfg.tasks.length << "\n";
  out << "tasks.seed = " << cfg.tasks.seed << "\n";
  out << "oracle.kind = " << cfg.oracle.kind << "\n";
  out << "oracle.command = " << cfg.oracle.command << "\n";
  out << "oracle.workdir = " << cfg.oracle.workdir << "\n";
  out << "oracle.timeout_s = " << cfg.oracle.timeout_s << "\n";
  out << "oracle.pool_size = " << cfg.oracle.pool_size << "\n";
  out << "seed = " << cfg.seed << "\n";
  return out.str();
}

std::vector<oracle::Task> make_synthetic_tasks(const RunConfig& cfg,
                                               const oracle::HelixOracleParams& params) {
  Rng rng(cfg.tasks.seed);
  std::vector<oracle::Task> tasks;
  tasks.reserve(static_cast<std::size_t>(cfg.tasks.count));
  for (int i = 0; i < cfg.tasks.count; ++i) {
    std::string seq;
    seq.reserve(static_cast<std::size_t>(cfg.tasks.length));
    for (int j = 0; j < cfg.tasks.length; ++j)
      seq.push_back(io::base_to_char(static_cast<io::Base>(rng.uniform_index(4))));
    tasks.push_back(oracle::make_task(params, seq, "task" + std::to_string(i)));
  }
  return tasks;
}

}  // namespace rider::config
