#pragma once

#include <string>

#include <Eigen/Dense>

#include "rider/errors.hpp"
#include "rider/struct_io.hpp"

namespace rider::metrics {

/// Least-squares rigid motion mapping one point set onto another.
struct SuperpositionResult {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();
  double rmsd = 0.0;

  /// Apply to row-vector points: p -> p * R^T + t^T.
  Eigen::MatrixXd apply(const Eigen::MatrixXd& points) const;
};

struct MetricsReport {
  double gdt_ts = 0.0;
  double tm_score = 0.0;
  double rmsd = 0.0;
  std::size_t n_residues = 0;
};

/// Optimal rigid superposition of p onto q (M x 3 each, rows are points).
/// SVD of the 3x3 cross-covariance with determinant-sign correction, so the
/// result is always a proper rotation, including degenerate inputs.
SuperpositionResult kabsch_superpose(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q);

/// RMSD over C4' points; superposed via Kabsch when requested.
double rmsd(const io::BackboneStructure& a, const io::BackboneStructure& b, bool superpose = true);
double rmsd_points(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q, bool superpose = true);

/// GDT_TS over cutoffs {1,2,4,8} A with an independently maximized residue
/// count per cutoff. The superposition search seeds from contiguous fragments
/// of lengths {3,5,7,N} and refines each by re-fitting to the inlier set
/// (cap 20 rounds); for N <= 10 every subset of size >= 3 is also seeded so
/// the search attains the subset-fit optimum exactly.
double gdt_ts(const io::BackboneStructure& a, const io::BackboneStructure& b);
double gdt_ts_points(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q);

/// TM-score normalized by the length of the target structure b, maximized
/// over superpositions (fragment seeding plus d0-inlier fixed-point
/// refinement; all fragment lengths are seeded when N <= 10).
double tm_score(const io::BackboneStructure& a, const io::BackboneStructure& b);
double tm_score_points(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q);

/// TM-score length normalization, clamped below at 0.5 A (the cube-root
/// formula goes negative for short chains).
double d0(std::size_t residue_count);

/// All three metrics over the same residue pairing.
MetricsReport metrics_report(const io::BackboneStructure& a, const io::BackboneStructure& b);

/// {"gdt_ts":..., "tm_score":..., "rmsd":..., "n":...} with 6 decimal places.
std::string to_json(const MetricsReport& r);
MetricsReport report_from_json(const std::string& text);

}  // namespace rider::metrics
