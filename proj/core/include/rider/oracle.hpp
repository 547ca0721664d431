#pragma once

#include <array>
#include <memory>
#include <string>

#include <Eigen/Dense>

#include "rider/errors.hpp"
#include "rider/struct_io.hpp"

namespace rider::oracle {

/// Maps a sequence to a 3D backbone for scoring designs.
class FoldingOracle {
public:
  virtual ~FoldingOracle() = default;
  virtual io::BackboneStructure fold(const std::string& letters) const = 0;
  virtual std::string name() const = 0;
};

/// Geometry tables of the synthetic helix oracle. Frozen test constants:
/// each base advances the helical frame by its own rise/twist and places its
/// atoms at its own local offsets, so every base is geometrically
/// distinguishable through the C4' trace alone.
struct HelixOracleParams {
  std::array<double, 4> rise = {2.0, 2.8, 3.6, 4.4};              // A, per base (A,C,G,U)
  std::array<double, 4> twist_deg = {30.0, 34.0, 38.0, 42.0};     // degrees, per base
  std::array<Eigen::Vector3d, 4> p_offset = {
      Eigen::Vector3d(2.0, 0.8, 0.6), Eigen::Vector3d(1.8, 1.0, 0.5),
      Eigen::Vector3d(2.2, 0.6, 0.7), Eigen::Vector3d(1.7, 1.2, 0.4)};
  std::array<Eigen::Vector3d, 4> c4p_offset = {
      Eigen::Vector3d(1.0, -0.6, 0.2), Eigen::Vector3d(0.4, -1.1, 0.1),
      Eigen::Vector3d(1.5, -0.1, 0.3), Eigen::Vector3d(-0.2, -1.6, 0.0)};
  std::array<Eigen::Vector3d, 4> n_offset = {
      Eigen::Vector3d(-0.8, -1.1, -0.3), Eigen::Vector3d(-0.5, -0.8, -0.2),
      Eigen::Vector3d(-1.0, -1.3, -0.4), Eigen::Vector3d(-0.3, -0.6, -0.1)};

  void validate() const;  // throws ConfigError
};

/// Deterministic helical fold: residue i sits in the frame accumulated from
/// the rises/twists of bases 1..i-1 and places its atoms at the offsets of
/// its own base rotated into that frame.
io::BackboneStructure helix_fold(const HelixOracleParams& params, const std::string& letters);

class HelixOracle final : public FoldingOracle {
public:
  explicit HelixOracle(HelixOracleParams params = {}) : params_(params) { params_.validate(); }
  io::BackboneStructure fold(const std::string& letters) const override {
    return helix_fold(params_, letters);
  }
  std::string name() const override { return "helix"; }
  const HelixOracleParams& params() const { return params_; }

private:
  HelixOracleParams params_;
};

struct SubprocessOracleConfig {
  std::string cmd_template;  // must contain {fasta} and {out_pdb}
  std::string workdir = ".";
  double timeout_s = 60.0;
  int pool_size = 1;  // max concurrent invocations
};

/// Runs an external predictor per sequence: writes FASTA, substitutes the
/// {fasta}/{out_pdb} placeholders, executes via the shell with a watchdog,
/// and parses the produced structure file. The private invocation directory
/// is removed on every exit path.
io::BackboneStructure subprocess_fold(const SubprocessOracleConfig& cfg,
                                      const std::string& letters);

class SubprocessOracle final : public FoldingOracle {
public:
  explicit SubprocessOracle(SubprocessOracleConfig cfg);
  ~SubprocessOracle() override;
  io::BackboneStructure fold(const std::string& letters) const override;
  std::string name() const override { return "subprocess"; }

private:
  struct Pool;
  SubprocessOracleConfig cfg_;
  std::unique_ptr<Pool> pool_;
};

/// A design task: the target produced by folding a known native sequence.
struct Task {
  io::BackboneStructure target;
  io::RnaSequence native;
  std::string id;
};

/// Builds a task from a native sequence; lengths below 4 are rejected so the
/// metrics preconditions always hold downstream.
Task make_task(const HelixOracleParams& params, const std::string& native_seq,
               const std::string& id = "");

}  // namespace rider::oracle
