#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rider/errors.hpp"
#include "rider/rng.hpp"
#include "rider/struct_io.hpp"

namespace rider::feat {

constexpr int kNodeScalarDim = 15;
constexpr int kNodeVectorDim = 4;
constexpr int kRbfCount = 32;
constexpr int kPosencDim = 32;
constexpr int kEdgeScalarDim = kRbfCount + kPosencDim + 1;  // 65
constexpr int kEdgeScalarParityDim = 131;                   // zero-padded on request
constexpr int kEdgeVectorDim = 1;

/// k-NN graph over residue centroids with scalar/vector node and edge features.
///
/// Node scalars (15): the three intra-residue atom distances, the three
/// triangle-angle cosines, centroid distances to i-1/i+1 (0 at termini),
/// sin/cos of the two centroid-trace dihedrals at i (0 when undefined), and
/// the pre-normalization norms of the forward, C4'->P and C4'->N vectors.
/// Node vectors (4): unit forward, unit backward, unit C4'->P, unit C4'->N
/// (zero vectors at chain termini).
/// Edge scalars (65): 32 RBF distance encodings, 32-dim signed positional
/// encoding of j-i, and the raw distance. Edge vector: unit displacement.
struct GeometricGraph {
  std::size_t n_nodes = 0;
  std::size_t k = 0;
  std::vector<std::vector<int>> neighbors;  // sorted by distance, ties by index
  Eigen::MatrixXd node_scalar;              // N x 15
  std::vector<Eigen::Matrix<double, kNodeVectorDim, 3>> node_vector;
  std::vector<std::vector<Eigen::VectorXd>> edge_scalar;   // [i][slot] -> 65 (or 131)
  std::vector<std::vector<Eigen::RowVector3d>> edge_vector;  // [i][slot] -> unit disp
  Eigen::MatrixXd coords;                   // N x 3 centroids
};

/// Node embeddings produced by the encoder: rotation-invariant scalars and
/// rotation-equivariant vector channels.
struct ConditioningEmbedding {
  Eigen::MatrixXd scalar;                                  // N x hidden_scalar
  std::vector<Eigen::Matrix<double, Eigen::Dynamic, 3>> vector;  // per node, hidden_vector x 3
};

struct EncoderConfig {
  int layers = 5;
  int hidden_scalar = 256;
  int hidden_vector = 24;
  std::uint64_t seed = 7;
};

/// Frozen, seeded parameters of the message-passing encoder.
struct EncoderParams {
  EncoderConfig config;

  Eigen::MatrixXd embed_scalar_w;  // hs x 15
  Eigen::VectorXd embed_scalar_b;
  Eigen::MatrixXd embed_vector_w;  // hv x 4

  struct Layer {
    Eigen::MatrixXd msg_scalar_w;  // hs x msg_in
    Eigen::VectorXd msg_scalar_b;
    Eigen::MatrixXd msg_gate_w;    // hv x msg_in
    Eigen::MatrixXd msg_vec_neighbor_w;  // hv x hv
    Eigen::MatrixXd msg_vec_edge_w;      // hv x 1
    Eigen::MatrixXd upd_scalar_w;  // hs x upd_in
    Eigen::VectorXd upd_scalar_b;
    Eigen::MatrixXd upd_gate_w;    // hv x upd_in
    Eigen::MatrixXd upd_vec_self_w;  // hv x hv
    Eigen::MatrixXd upd_vec_msg_w;   // hv x hv
  };
  std::vector<Layer> layers;
};

EncoderParams make_encoder_params(const EncoderConfig& config);

/// Build the k-NN graph. Throws GraphError for single-residue structures.
GeometricGraph build_graph(const io::BackboneStructure& s, std::size_t k = 32,
                           bool pad_edge_scalar_parity = false);

/// Gaussian bumps exp(-(d - mu_m)^2 / sigma^2), centers evenly spaced on
/// [0, d_max], sigma equal to the spacing.
Eigen::VectorXd rbf_encode(double d, int n_centers = kRbfCount, double d_max = 30.0);

/// Interleaved (sin, cos) of offset at frequencies 10000^(-2m/dim).
Eigen::VectorXd posenc(long offset, int dim = kPosencDim);

/// Forward pass of the message/update stack; deterministic for fixed params.
ConditioningEmbedding encode_structure(const GeometricGraph& g, const EncoderParams& params);

/// Convenience overload with default-seeded parameters.
ConditioningEmbedding encode_structure(const GeometricGraph& g, int layers = 5);

/// Training-mode coordinate jitter: adds N(0, sigma^2) noise per coordinate
/// and recomputes centroids.
io::BackboneStructure jitter_coordinates(const io::BackboneStructure& s, double sigma, Rng& rng);

/// Debug dump of node/edge feature arrays.
std::string graph_to_json(const GeometricGraph& g);

}  // namespace rider::feat
