#include "rider/featurize.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <nlohmann/json.hpp>

namespace rider::feat {

namespace {

double silu(double x) { return x / (1.0 + std::exp(-x)); }
double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::Vector3d unit_or_zero(const Eigen::Vector3d& v) {
  const double n = v.norm();
  return n > 0.0 ? Eigen::Vector3d(v / n) : Eigen::Vector3d::Zero();
}

/// Signed dihedral angle of the four points, NaN-free; returns 0 when any
/// cross product degenerates.
double dihedral(const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                const Eigen::Vector3d& d) {
  const Eigen::Vector3d b1 = b - a, b2 = c - b, b3 = d - c;
  const Eigen::Vector3d n1 = b1.cross(b2), n2 = b2.cross(b3);
  const double n1n = n1.norm(), n2n = n2.norm(), b2n = b2.norm();
  if (n1n < 1e-12 || n2n < 1e-12 || b2n < 1e-12) return 0.0;
  const double x = n1.dot(n2);
  const double y = b2n * b1.dot(n2);
  return std::atan2(y, x);
}

double angle_cos(const Eigen::Vector3d& at, const Eigen::Vector3d& u, const Eigen::Vector3d& v) {
  const Eigen::Vector3d a = u - at, b = v - at;
  const double na = a.norm(), nb = b.norm();
  if (na < 1e-12 || nb < 1e-12) return 0.0;
  return a.dot(b) / (na * nb);
}

Eigen::MatrixXd glorot(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  return rng.normal_matrix(rows, cols) * scale;
}

/// Per-channel Euclidean norms of a C x 3 vector feature block.
Eigen::VectorXd channel_norms(const Eigen::Matrix<double, Eigen::Dynamic, 3>& v) {
  Eigen::VectorXd out(v.rows());
  for (Eigen::Index c = 0; c < v.rows(); ++c) out(c) = v.row(c).norm();
  return out;
}

}  // namespace

Eigen::VectorXd rbf_encode(double d, int n_centers, double d_max) {
  Eigen::VectorXd out(n_centers);
  const double spacing = d_max / static_cast<double>(n_centers - 1);
  for (int m = 0; m < n_centers; ++m) {
    const double mu = spacing * m;
    const double z = (d - mu) / spacing;
    out(m) = std::exp(-z * z);
  }
  return out;
}

Eigen::VectorXd posenc(long offset, int dim) {
  if (dim % 2 != 0) throw ConfigError("posenc dimension must be even");
  Eigen::VectorXd out(dim);
  for (int m = 0; m < dim / 2; ++m) {
    const double freq = std::pow(10000.0, -2.0 * m / static_cast<double>(dim));
    out(2 * m) = std::sin(offset * freq);
    out(2 * m + 1) = std::cos(offset * freq);
  }
  return out;
}

GeometricGraph build_graph(const io::BackboneStructure& s, std::size_t k,
                           bool pad_edge_scalar_parity) {
  const std::size_t n = s.size();
  if (n < 2) throw GraphError("graph construction needs at least 2 residues");

  GeometricGraph g;
  g.n_nodes = n;
  g.k = std::min(k, n - 1);
  g.coords = s.centroid_points();

  // Neighbor lists: ascending distance, ties by ascending index.
  g.neighbors.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<std::pair<double, int>> cand;
    cand.reserve(n - 1);
    for (std::size_t j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.emplace_back((g.coords.row(static_cast<Eigen::Index>(j)) -
                         g.coords.row(static_cast<Eigen::Index>(i)))
                            .norm(),
                        static_cast<int>(j));
    }
    std::sort(cand.begin(), cand.end());
    g.neighbors[i].reserve(g.k);
    for (std::size_t t = 0; t < g.k; ++t) g.neighbors[i].push_back(cand[t].second);
  }

  // Node features.
  g.node_scalar.resize(static_cast<Eigen::Index>(n), kNodeScalarDim);
  g.node_vector.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& r = s.residues[i];
    const Eigen::Vector3d ci = r.centroid;
    const bool has_prev = i > 0, has_next = i + 1 < n;
    const Eigen::Vector3d fwd =
        has_next ? Eigen::Vector3d(s.residues[i + 1].centroid - ci) : Eigen::Vector3d::Zero();
    const Eigen::Vector3d bwd =
        has_prev ? Eigen::Vector3d(s.residues[i - 1].centroid - ci) : Eigen::Vector3d::Zero();
    const Eigen::Vector3d to_p = r.p - r.c4p;
    const Eigen::Vector3d to_n = r.n_glyco - r.c4p;

    auto& v = g.node_vector[i];
    v.row(0) = unit_or_zero(fwd).transpose();
    v.row(1) = unit_or_zero(bwd).transpose();
    v.row(2) = unit_or_zero(to_p).transpose();
    v.row(3) = unit_or_zero(to_n).transpose();

    double d1 = 0.0, d2 = 0.0;
    if (i >= 2 && has_next)
      d1 = dihedral(s.residues[i - 2].centroid, s.residues[i - 1].centroid, ci,
                    s.residues[i + 1].centroid);
    if (has_prev && i + 2 < n)
      d2 = dihedral(s.residues[i - 1].centroid, ci, s.residues[i + 1].centroid,
                    s.residues[i + 2].centroid);
    const bool def1 = i >= 2 && has_next;
    const bool def2 = has_prev && i + 2 < n;

    Eigen::Index col = 0;
    auto put = [&](double x) { g.node_scalar(static_cast<Eigen::Index>(i), col++) = x; };
    put((r.p - r.c4p).norm());
    put((r.p - r.n_glyco).norm());
    put((r.c4p - r.n_glyco).norm());
    put(angle_cos(r.p, r.c4p, r.n_glyco));
    put(angle_cos(r.c4p, r.p, r.n_glyco));
    put(angle_cos(r.n_glyco, r.p, r.c4p));
    put(has_prev ? bwd.norm() : 0.0);
    put(has_next ? fwd.norm() : 0.0);
    put(def1 ? std::sin(d1) : 0.0);
    put(def1 ? std::cos(d1) : 0.0);
    put(def2 ? std::sin(d2) : 0.0);
    put(def2 ? std::cos(d2) : 0.0);
    put(fwd.norm());
    put(to_p.norm());
    put(to_n.norm());
  }

  // Edge features.
  const int es_dim = pad_edge_scalar_parity ? kEdgeScalarParityDim : kEdgeScalarDim;
  g.edge_scalar.resize(n);
  g.edge_vector.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g.edge_scalar[i].reserve(g.k);
    g.edge_vector[i].reserve(g.k);
    for (int j : g.neighbors[i]) {
      const Eigen::RowVector3d disp = g.coords.row(j) - g.coords.row(static_cast<Eigen::Index>(i));
      const double dist = disp.norm();
      Eigen::VectorXd es = Eigen::VectorXd::Zero(es_dim);
      es.segment(0, kRbfCount) = rbf_encode(dist);
      es.segment(kRbfCount, kPosencDim) = posenc(j - static_cast<long>(i));
      es(kRbfCount + kPosencDim) = dist;
      g.edge_scalar[i].push_back(std::move(es));
      g.edge_vector[i].push_back(dist > 0.0 ? Eigen::RowVector3d(disp / dist)
                                            : Eigen::RowVector3d::Zero());
    }
  }
  return g;
}

EncoderParams make_encoder_params(const EncoderConfig& config) {
  const int hs = config.hidden_scalar;
  const int hv = config.hidden_vector;
  const int msg_in = hs + hs + kEdgeScalarDim + hv + 1;
  const int upd_in = hs + hs + hv + hv;

  Rng rng(config.seed);
  EncoderParams p;
  p.config = config;
  p.embed_scalar_w = glorot(rng, hs, kNodeScalarDim);
  p.embed_scalar_b = rng.normal_vector(hs) * 0.1;
  p.embed_vector_w = glorot(rng, hv, kNodeVectorDim);
  p.layers.resize(static_cast<std::size_t>(config.layers));
  for (auto& layer : p.layers) {
    layer.msg_scalar_w = glorot(rng, hs, msg_in);
    layer.msg_scalar_b = rng.normal_vector(hs) * 0.1;
    layer.msg_gate_w = glorot(rng, hv, msg_in);
    layer.msg_vec_neighbor_w = glorot(rng, hv, hv);
    layer.msg_vec_edge_w = glorot(rng, hv, 1);
    layer.upd_scalar_w = glorot(rng, hs, upd_in);
    layer.upd_scalar_b = rng.normal_vector(hs) * 0.1;
    layer.upd_gate_w = glorot(rng, hv, upd_in);
    layer.upd_vec_self_w = glorot(rng, hv, hv);
    layer.upd_vec_msg_w = glorot(rng, hv, hv);
  }
  return p;
}

ConditioningEmbedding encode_structure(const GeometricGraph& g, const EncoderParams& params) {
  const int hs = params.config.hidden_scalar;
  const int hv = params.config.hidden_vector;
  const auto n = static_cast<Eigen::Index>(g.n_nodes);

  // Input embedding. Scalars mix through a linear map; vector channels mix in
  // channel space only, which preserves equivariance exactly.
  Eigen::MatrixXd s = (params.embed_scalar_w * g.node_scalar.transpose()).colwise() +
                      params.embed_scalar_b;  // hs x N
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 3>> v(g.n_nodes);
  for (std::size_t i = 0; i < g.n_nodes; ++i) v[i] = params.embed_vector_w * g.node_vector[i];

  Eigen::VectorXd msg_cat(hs + hs + kEdgeScalarDim + hv + 1);
  Eigen::VectorXd upd_cat(hs + hs + hv + hv);
  for (const auto& layer : params.layers) {
    Eigen::MatrixXd ms = Eigen::MatrixXd::Zero(hs, n);
    std::vector<Eigen::Matrix<double, Eigen::Dynamic, 3>> mv(
        g.n_nodes, Eigen::Matrix<double, Eigen::Dynamic, 3>::Zero(hv, 3));

    for (std::size_t i = 0; i < g.n_nodes; ++i) {
      const auto deg = static_cast<double>(g.neighbors[i].size());
      for (std::size_t slot = 0; slot < g.neighbors[i].size(); ++slot) {
        const int j = g.neighbors[i][slot];
        const auto& es = g.edge_scalar[i][slot];
        const auto& ev = g.edge_vector[i][slot];

        msg_cat.segment(0, hs) = s.col(static_cast<Eigen::Index>(i));
        msg_cat.segment(hs, hs) = s.col(j);
        msg_cat.segment(2 * hs, kEdgeScalarDim) = es.head(kEdgeScalarDim);
        msg_cat.segment(2 * hs + kEdgeScalarDim, hv) = channel_norms(v[static_cast<std::size_t>(j)]);
        msg_cat(2 * hs + kEdgeScalarDim + hv) = ev.norm();

        ms.col(static_cast<Eigen::Index>(i)) +=
            (layer.msg_scalar_w * msg_cat + layer.msg_scalar_b).unaryExpr([](double x) {
              return silu(x);
            });
        const Eigen::VectorXd gate =
            (layer.msg_gate_w * msg_cat).unaryExpr([](double x) { return sigmoid(x); });
        Eigen::Matrix<double, Eigen::Dynamic, 3> vm =
            layer.msg_vec_neighbor_w * v[static_cast<std::size_t>(j)] +
            layer.msg_vec_edge_w * ev;
        mv[i] += gate.asDiagonal() * vm;
      }
      ms.col(static_cast<Eigen::Index>(i)) /= deg;
      mv[i] /= deg;
    }

    for (std::size_t i = 0; i < g.n_nodes; ++i) {
      upd_cat.segment(0, hs) = s.col(static_cast<Eigen::Index>(i));
      upd_cat.segment(hs, hs) = ms.col(static_cast<Eigen::Index>(i));
      upd_cat.segment(2 * hs, hv) = channel_norms(v[i]);
      upd_cat.segment(2 * hs + hv, hv) = channel_norms(mv[i]);

      s.col(static_cast<Eigen::Index>(i)) +=
          (layer.upd_scalar_w * upd_cat + layer.upd_scalar_b).unaryExpr([](double x) {
            return silu(x);
          });
      const Eigen::VectorXd gate =
          (layer.upd_gate_w * upd_cat).unaryExpr([](double x) { return sigmoid(x); });
      v[i] += gate.asDiagonal() * (layer.upd_vec_self_w * v[i] + layer.upd_vec_msg_w * mv[i]);
    }
  }

  // Per-channel RMS normalization over nodes keeps the embedding scale
  // uniform for downstream linear readouts; node statistics of invariant
  // channels are themselves invariant, so equivariance is unaffected.
  Eigen::MatrixXd scalar = s.transpose();
  for (Eigen::Index c = 0; c < scalar.cols(); ++c) {
    const double rms = std::sqrt(scalar.col(c).squaredNorm() / static_cast<double>(n) + 1e-8);
    scalar.col(c) /= rms;
  }

  ConditioningEmbedding out;
  out.scalar = std::move(scalar);
  out.vector = std::move(v);
  return out;
}

ConditioningEmbedding encode_structure(const GeometricGraph& g, int layers) {
  EncoderConfig cfg;
  cfg.layers = layers;
  return encode_structure(g, make_encoder_params(cfg));
}

io::BackboneStructure jitter_coordinates(const io::BackboneStructure& s, double sigma, Rng& rng) {
  io::BackboneStructure out = s;
  for (auto& r : out.residues) {
    for (Eigen::Vector3d* atom : {&r.p, &r.c4p, &r.n_glyco})
      for (int d = 0; d < 3; ++d) (*atom)(d) += rng.normal(0.0, sigma);
    r = io::ResidueAtoms::make(r.base, r.p, r.c4p, r.n_glyco);
  }
  return out;
}

std::string graph_to_json(const GeometricGraph& g) {
  nlohmann::json j;
  j["n_nodes"] = g.n_nodes;
  j["k"] = g.k;
  j["neighbors"] = g.neighbors;
  auto mat_rows = [](const Eigen::MatrixXd& m) {
    std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      rows[static_cast<std::size_t>(i)].assign(m.row(i).begin(), m.row(i).end());
    }
    return rows;
  };
  j["coords"] = mat_rows(g.coords);
  j["node_scalar"] = mat_rows(g.node_scalar);
  {
    std::vector<std::vector<std::vector<double>>> nv;
    for (const auto& v : g.node_vector) {
      std::vector<std::vector<double>> rows;
      for (Eigen::Index c = 0; c < v.rows(); ++c)
        rows.push_back({v(c, 0), v(c, 1), v(c, 2)});
      nv.push_back(std::move(rows));
    }
    j["node_vector"] = nv;
  }
  {
    std::vector<std::vector<std::vector<double>>> es(g.n_nodes);
    std::vector<std::vector<std::vector<double>>> ev(g.n_nodes);
    for (std::size_t i = 0; i < g.n_nodes; ++i) {
      for (const auto& e : g.edge_scalar[i])
        es[i].push_back(std::vector<double>(e.begin(), e.end()));
      for (const auto& e : g.edge_vector[i]) ev[i].push_back({e(0), e(1), e(2)});
    }
    j["edge_scalar"] = es;
    j["edge_vector"] = ev;
  }
  return j.dump();
}

}  // namespace rider::feat
