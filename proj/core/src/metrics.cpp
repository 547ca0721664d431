#include "rider/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>
#include <vector>

#include <nlohmann/json.hpp>

namespace rider::metrics {

namespace {

constexpr double kGdtCutoffs[4] = {1.0, 2.0, 4.0, 8.0};
constexpr int kMaxGdtRefineRounds = 20;
constexpr int kMaxTmRefineRounds = 100;
constexpr std::size_t kExhaustiveSeedLimit = 10;

void check_paired_points(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  if (p.cols() != 3 || q.cols() != 3)
    throw ShapeError("expected M x 3 point matrices");
  if (p.rows() != q.rows())
    throw ShapeError("point count mismatch: " + std::to_string(p.rows()) + " vs " +
                     std::to_string(q.rows()));
  if (p.rows() < 1) throw ShapeError("need at least one point pair");
}

Eigen::MatrixXd select_rows(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
  return out;
}

std::vector<double> pair_distances(const Eigen::MatrixXd& moved, const Eigen::MatrixXd& q) {
  std::vector<double> d(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index i = 0; i < q.rows(); ++i)
    d[static_cast<std::size_t>(i)] = (moved.row(i) - q.row(i)).norm();
  return d;
}

/// Contiguous fragment index lists of the given lengths (deduplicated).
std::vector<std::vector<int>> fragment_seeds(int n, bool exhaustive_lengths) {
  std::vector<int> lengths;
  if (exhaustive_lengths) {
    for (int len = 3; len <= n; ++len) lengths.push_back(len);
  } else {
    for (int len : {3, 5, 7})
      if (len < n) lengths.push_back(len);
    lengths.push_back(n);
  }
  std::vector<std::vector<int>> seeds;
  for (int len : lengths) {
    for (int start = 0; start + len <= n; ++start) {
      std::vector<int> idx(static_cast<std::size_t>(len));
      for (int i = 0; i < len; ++i) idx[static_cast<std::size_t>(i)] = start + i;
      seeds.push_back(std::move(idx));
    }
  }
  return seeds;
}

/// All index subsets of size >= 3; only used for small n.
std::vector<std::vector<int>> subset_seeds(int n) {
  std::vector<std::vector<int>> seeds;
  const unsigned total = 1u << n;
  for (unsigned mask = 0; mask < total; ++mask) {
    if (__builtin_popcount(mask) < 3) continue;
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    seeds.push_back(std::move(idx));
  }
  return seeds;
}

}  // namespace

Eigen::MatrixXd SuperpositionResult::apply(const Eigen::MatrixXd& points) const {
  return (points * rotation.transpose()).rowwise() + translation.transpose();
}

SuperpositionResult kabsch_superpose(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  check_paired_points(p, q);
  const Eigen::RowVector3d p_mean = p.colwise().mean();
  const Eigen::RowVector3d q_mean = q.colwise().mean();
  const Eigen::MatrixXd pc = p.rowwise() - p_mean;
  const Eigen::MatrixXd qc = q.rowwise() - q_mean;

  const Eigen::Matrix3d cov = pc.transpose() * qc;
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d u = svd.matrixU();
  Eigen::Matrix3d v = svd.matrixV();
  Eigen::Vector3d signs(1.0, 1.0, 1.0);
  if ((v * u.transpose()).determinant() < 0.0) signs(2) = -1.0;
  const Eigen::Matrix3d rot = v * signs.asDiagonal() * u.transpose();

  SuperpositionResult res;
  res.rotation = rot;
  res.translation = q_mean.transpose() - rot * p_mean.transpose();
  res.rmsd = std::sqrt((res.apply(p) - q).rowwise().squaredNorm().mean());
  return res;
}

double rmsd_points(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q, bool superpose) {
  check_paired_points(p, q);
  if (superpose) return kabsch_superpose(p, q).rmsd;
  return std::sqrt((p - q).rowwise().squaredNorm().mean());
}

double rmsd(const io::BackboneStructure& a, const io::BackboneStructure& b, bool superpose) {
  return rmsd_points(a.c4p_points(), b.c4p_points(), superpose);
}

double gdt_ts_points(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  check_paired_points(p, q);
  const int n = static_cast<int>(p.rows());
  if (n < 3) throw ShapeError("gdt_ts needs at least 3 residues");

  auto seeds = fragment_seeds(n, false);
  if (static_cast<std::size_t>(n) <= kExhaustiveSeedLimit) {
    auto subsets = subset_seeds(n);
    seeds.insert(seeds.end(), subsets.begin(), subsets.end());
  }

  // Per-cutoff inlier counts, maximized independently over every examined
  // superposition. Each refinement fit is itself a subset fit, so tracking
  // the running maximum keeps the search within the subset-fit optimum.
  int best[4] = {0, 0, 0, 0};
  for (const auto& seed : seeds) {
    SuperpositionResult sup = kabsch_superpose(select_rows(p, seed), select_rows(q, seed));
    for (int c = 0; c < 4; ++c) {
      const double cutoff = kGdtCutoffs[c];
      std::vector<int> inliers;
      {
        const auto d = pair_distances(sup.apply(p), q);
        for (int i = 0; i < n; ++i)
          if (d[static_cast<std::size_t>(i)] <= cutoff) inliers.push_back(i);
      }
      best[c] = std::max(best[c], static_cast<int>(inliers.size()));
      std::vector<int> prev = seed;
      for (int round = 0; round < kMaxGdtRefineRounds; ++round) {
        if (inliers.size() < 3 || inliers == prev) break;
        prev = inliers;
        const SuperpositionResult refit =
            kabsch_superpose(select_rows(p, inliers), select_rows(q, inliers));
        const auto d = pair_distances(refit.apply(p), q);
        inliers.clear();
        for (int i = 0; i < n; ++i)
          if (d[static_cast<std::size_t>(i)] <= cutoff) inliers.push_back(i);
        best[c] = std::max(best[c], static_cast<int>(inliers.size()));
      }
    }
  }
  double total = 0.0;
  for (int c = 0; c < 4; ++c) total += static_cast<double>(best[c]);
  return total / (4.0 * n);
}

double gdt_ts(const io::BackboneStructure& a, const io::BackboneStructure& b) {
  return gdt_ts_points(a.c4p_points(), b.c4p_points());
}

double d0(std::size_t residue_count) {
  const double raw = 1.24 * std::cbrt(static_cast<double>(residue_count) - 15.0) - 1.8;
  return std::max(raw, 0.5);
}

double tm_score_points(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q) {
  check_paired_points(p, q);
  const int n = static_cast<int>(p.rows());
  if (n < 3) throw ShapeError("tm_score needs at least 3 residues");
  const double scale = d0(static_cast<std::size_t>(n));

  auto score_of = [&](const SuperpositionResult& sup) {
    const auto d = pair_distances(sup.apply(p), q);
    double s = 0.0;
    for (double di : d) s += 1.0 / (1.0 + (di / scale) * (di / scale));
    return s / n;
  };

  const auto seeds = fragment_seeds(n, static_cast<std::size_t>(n) <= kExhaustiveSeedLimit);
  double best = 0.0;
  for (const auto& seed : seeds) {
    SuperpositionResult sup = kabsch_superpose(select_rows(p, seed), select_rows(q, seed));
    double score = score_of(sup);
    best = std::max(best, score);
    for (int round = 0; round < kMaxTmRefineRounds; ++round) {
      std::vector<int> close;
      const auto d = pair_distances(sup.apply(p), q);
      for (int i = 0; i < n; ++i)
        if (d[static_cast<std::size_t>(i)] < scale) close.push_back(i);
      if (close.size() < 3) break;
      sup = kabsch_superpose(select_rows(p, close), select_rows(q, close));
      const double next = score_of(sup);
      best = std::max(best, next);
      if (std::abs(next - score) < 1e-9) break;
      score = next;
    }
  }
  return best;
}

double tm_score(const io::BackboneStructure& a, const io::BackboneStructure& b) {
  return tm_score_points(a.c4p_points(), b.c4p_points());
}

MetricsReport metrics_report(const io::BackboneStructure& a, const io::BackboneStructure& b) {
  MetricsReport r;
  r.gdt_ts = gdt_ts(a, b);
  r.tm_score = tm_score(a, b);
  r.rmsd = rmsd(a, b, true);
  r.n_residues = b.size();
  return r;
}

std::string to_json(const MetricsReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof(buf),
                "{\"gdt_ts\":%.6f,\"tm_score\":%.6f,\"rmsd\":%.6f,\"n\":%zu}", r.gdt_ts,
                r.tm_score, r.rmsd, r.n_residues);
  return buf;
}

MetricsReport report_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad metrics JSON: ") + e.what());
  }
  MetricsReport r;
  try {
    r.gdt_ts = j.at("gdt_ts").get<double>();
    r.tm_score = j.at("tm_score").get<double>();
    r.rmsd = j.at("rmsd").get<double>();
    r.n_residues = j.value("n", std::size_t{0});
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad metrics JSON: ") + e.what());
  }
  return r;
}

}  // namespace rider::metrics
