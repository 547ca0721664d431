#include "rider/policy.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace rider::policy {

namespace {

void check_block_dims(const FeatureSpec& spec, const Eigen::MatrixXd& x_t,
                      const Eigen::MatrixXd& h_scalar) {
  if (x_t.cols() != spec.x_dim)
    throw ShapeError("latent block has " + std::to_string(x_t.cols()) + " channels, expected " +
                     std::to_string(spec.x_dim));
  if (h_scalar.cols() != spec.h_dim)
    throw ShapeError("conditioning block has " + std::to_string(h_scalar.cols()) +
                     " channels, expected " + std::to_string(spec.h_dim));
  if (x_t.rows() != h_scalar.rows())
    throw ShapeError("latent and conditioning blocks disagree on node count");
}

}  // namespace

PolicyParams PolicyParams::seeded(const FeatureSpec& spec, std::uint64_t seed, double init_std) {
  Rng rng(seed);
  PolicyParams p;
  p.spec = spec;
  p.w = rng.normal_matrix(kSeqChannels, spec.input_dim()) * init_std;
  p.b = rng.normal_vector(kSeqChannels) * init_std;
  return p;
}

std::uint64_t PolicySnapshot::content_hash() const {
  // FNV-1a over the raw parameter bytes.
  std::uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const double* data, std::size_t n) {
    const auto* bytes = reinterpret_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n * sizeof(double); ++i) {
      h ^= bytes[i];
      h *= 1099511628211ULL;
    }
  };
  mix(params_.w.data(), static_cast<std::size_t>(params_.w.size()));
  mix(params_.b.data(), static_cast<std::size_t>(params_.b.size()));
  return h;
}

PolicyGrad PolicyGrad::zeros(const FeatureSpec& spec) {
  PolicyGrad g;
  g.w = Eigen::MatrixXd::Zero(kSeqChannels, spec.input_dim());
  g.b = Eigen::VectorXd::Zero(kSeqChannels);
  return g;
}

AdamOptimizer::AdamOptimizer(const FeatureSpec& spec)
    : m_w_(Eigen::MatrixXd::Zero(kSeqChannels, spec.input_dim())),
      v_w_(Eigen::MatrixXd::Zero(kSeqChannels, spec.input_dim())),
      m_b_(Eigen::VectorXd::Zero(kSeqChannels)),
      v_b_(Eigen::VectorXd::Zero(kSeqChannels)) {}

void AdamOptimizer::apply_descent(PolicyParams& params, const PolicyGrad& grad,
                                  double learning_rate) {
  constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
  step_ += 1;
  const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step_));
  const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step_));
  m_w_ = kBeta1 * m_w_ + (1.0 - kBeta1) * grad.w;
  v_w_ = kBeta2 * v_w_ + (1.0 - kBeta2) * grad.w.cwiseProduct(grad.w);
  m_b_ = kBeta1 * m_b_ + (1.0 - kBeta1) * grad.b;
  v_b_ = kBeta2 * v_b_ + (1.0 - kBeta2) * grad.b.cwiseProduct(grad.b);

  const Eigen::MatrixXd denom_w =
      (v_w_ / bc2).cwiseSqrt() + Eigen::MatrixXd::Constant(m_w_.rows(), m_w_.cols(), kEps);
  const Eigen::VectorXd denom_b =
      (v_b_ / bc2).cwiseSqrt() + Eigen::VectorXd::Constant(m_b_.size(), kEps);
  params.w -= learning_rate * (m_w_ / bc1).cwiseQuotient(denom_w);
  params.b -= learning_rate * (m_b_ / bc1).cwiseQuotient(denom_b);
}

Eigen::VectorXd time_embed(double t) {
  Eigen::VectorXd out(kTimeEmbedDim);
  for (int m = 0; m < kTimeEmbedDim / 2; ++m) {
    const double freq = std::pow(10000.0, -2.0 * m / static_cast<double>(kTimeEmbedDim));
    out(2 * m) = std::sin(t * freq);
    out(2 * m + 1) = std::cos(t * freq);
  }
  return out;
}

Eigen::MatrixXd input_features(const FeatureSpec& spec, const Eigen::MatrixXd& x_t, double t,
                               const Eigen::MatrixXd& h_scalar) {
  check_block_dims(spec, x_t, h_scalar);
  const Eigen::Index n = x_t.rows();
  Eigen::MatrixXd f(n, spec.input_dim());
  f.block(0, 0, n, spec.x_dim) = x_t;
  f.block(0, spec.x_dim, n, spec.t_dim) = time_embed(t).transpose().replicate(n, 1);
  f.block(0, spec.x_dim + spec.t_dim, n, spec.h_dim) = h_scalar;
  return f;
}

Eigen::MatrixXd predict_noise(const PolicyParams& params, const Eigen::MatrixXd& x_t, double t,
                              const Eigen::MatrixXd& h_scalar) {
  const Eigen::MatrixXd f = input_features(params.spec, x_t, t, h_scalar);
  return (f * params.w.transpose()).rowwise() + params.b.transpose();
}

namespace {

struct StepEval {
  Eigen::MatrixXd features;   // N x d
  Eigen::MatrixXd mean;       // N x 4
  double density_std = 0.0;
  double eps_coef = 0.0;
  double log_prob = 0.0;
};

StepEval evaluate_step(const PolicyParams& params, const diffusion::StepRecord& step,
                       double temperature, const Eigen::MatrixXd& h_scalar,
                       const diffusion::NoiseSchedule& sched) {
  if (step.x_t.size() == 0 || step.action.size() == 0)
    throw StateError("trajectory step record is missing its state or action");
  if (step.x_t.rows() != step.action.rows() || step.x_t.cols() != step.action.cols())
    throw StateError("trajectory step state/action shapes disagree");
  if (h_scalar.rows() != step.x_t.rows())
    throw StateError("conditioning block does not match the step's node count");

  const auto m = diffusion::ddim_moments(sched, step.t_k, step.t_km1, temperature);
  StepEval ev;
  ev.features = input_features(params.spec, step.x_t, step.t_k, h_scalar);
  const Eigen::MatrixXd eps_hat =
      (ev.features * params.w.transpose()).rowwise() + params.b.transpose();
  ev.mean = m.x_coef * step.x_t + m.eps_coef * eps_hat;
  ev.density_std = m.density_std;
  ev.eps_coef = m.eps_coef;

  double lp = 0.0;
  for (Eigen::Index i = 0; i < step.action.rows(); ++i)
    for (Eigen::Index c = 0; c < step.action.cols(); ++c)
      lp += diffusion::normal_log_pdf(step.action(i, c), ev.mean(i, c), ev.density_std);
  ev.log_prob = lp;
  return ev;
}

}  // namespace

double log_prob(const PolicyParams& params, const diffusion::StepRecord& step, double temperature,
                const Eigen::MatrixXd& h_scalar, const diffusion::NoiseSchedule& sched) {
  return evaluate_step(params, step, temperature, h_scalar, sched).log_prob;
}

LogProbGrad grad_log_prob(const PolicyParams& params, const diffusion::StepRecord& step,
                          double temperature, const Eigen::MatrixXd& h_scalar,
                          const diffusion::NoiseSchedule& sched) {
  const StepEval ev = evaluate_step(params, step, temperature, h_scalar, sched);

  // d logp / d mean = (action - mean) / std^2, and mean is eps_coef * (W f + b)
  // plus a parameter-free term, so:
  //   d logp / d W = (eps_coef / std^2) * residual^T . features
  //   d logp / d b = (eps_coef / std^2) * column sums of residual
  const Eigen::MatrixXd residual = step.action - ev.mean;
  const double scale = ev.eps_coef / (ev.density_std * ev.density_std);

  LogProbGrad out;
  out.log_prob = ev.log_prob;
  out.grad.w = scale * residual.transpose() * ev.features;
  out.grad.b = scale * residual.colwise().sum().transpose();
  return out;
}

std::string to_checkpoint_json(const PolicyParams& params) {
  nlohmann::json j;
  j["version"] = 1;
  j["x_dim"] = params.spec.x_dim;
  j["t_dim"] = params.spec.t_dim;
  j["h_dim"] = params.spec.h_dim;
  std::vector<double> w(params.w.data(), params.w.data() + params.w.size());
  std::vector<double> b(params.b.data(), params.b.data() + params.b.size());
  j["w"] = w;  // column-major flat dump
  j["b"] = b;
  return j.dump();
}

PolicyParams from_checkpoint_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad checkpoint JSON: ") + e.what());
  }
  if (j.value("version", 0) != 1) throw ConfigError("unsupported checkpoint version");
  PolicyParams p;
  p.spec.x_dim = j.at("x_dim").get<int>();
  p.spec.t_dim = j.at("t_dim").get<int>();
  p.spec.h_dim = j.at("h_dim").get<int>();
  const auto w = j.at("w").get<std::vector<double>>();
  const auto b = j.at("b").get<std::vector<double>>();
  if (static_cast<int>(w.size()) != kSeqChannels * p.spec.input_dim() ||
      static_cast<int>(b.size()) != kSeqChannels)
    throw ConfigError("checkpoint parameter sizes disagree with dims header");
  p.w = Eigen::Map<const Eigen::MatrixXd>(w.data(), kSeqChannels, p.spec.input_dim());
  p.b = Eigen::Map<const Eigen::VectorXd>(b.data(), kSeqChannels);
  return p;
}

}  // namespace rider::policy
