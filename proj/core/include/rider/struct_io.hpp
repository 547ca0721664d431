#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rider/errors.hpp"

namespace rider::io {

enum class Base : int { A = 0, C = 1, G = 2, U = 3 };

constexpr int kNumBases = 4;

char base_to_char(Base b);
Base char_to_base(char c);  // throws AlphabetError

/// True for A/G (glycosidic nitrogen N9), false for C/U (N1).
bool is_purine(Base b);

/// The three representative backbone atoms of one nucleotide plus their centroid.
struct ResidueAtoms {
  Base base = Base::A;
  Eigen::Vector3d p = Eigen::Vector3d::Zero();        // phosphorus
  Eigen::Vector3d c4p = Eigen::Vector3d::Zero();      // C4'
  Eigen::Vector3d n_glyco = Eigen::Vector3d::Zero();  // N1 (C/U) or N9 (A/G)
  Eigen::Vector3d centroid = Eigen::Vector3d::Zero();

  static ResidueAtoms make(Base base, const Eigen::Vector3d& p, const Eigen::Vector3d& c4p,
                           const Eigen::Vector3d& n_glyco);
};

struct BackboneStructure {
  std::vector<ResidueAtoms> residues;
  std::string chain_id;
  std::string source;

  std::size_t size() const { return residues.size(); }

  /// Sequence letters of the residues in order.
  std::string sequence() const;

  /// M x 3 matrix of one representative point per residue.
  Eigen::MatrixXd c4p_points() const;
  Eigen::MatrixXd centroid_points() const;
};

struct RnaSequence {
  std::string letters;
  Eigen::MatrixXd onehot;  // N x 4, channel order (A, C, G, U)
};

struct ParsedBackbone {
  BackboneStructure structure;
  std::size_t dropped_residues = 0;  // residues missing any of the three atoms
};

/// Parse fixed-column ATOM records and extract the P/C4'/N1-or-N9 triple per
/// residue. Only ATOM records with blank or 'A' altloc and residue name in
/// {A,C,G,U} are considered; the first chain with at least one complete RNA
/// residue is kept. Residues missing any of the three atoms are dropped and
/// counted.
ParsedBackbone parse_pdb_backbone(const std::string& text, const std::string& source = "");

/// One-hot encoding over channel order (A, C, G, U).
RnaSequence sequence_to_onehot(const std::string& letters);

/// Per-row argmax mapped through (A, C, G, U); ties break to the lowest channel.
std::string decode_argmax(const Eigen::MatrixXd& x0_hat);

/// FASTA record with the sequence wrapped at 60 columns.
std::string to_fasta(const std::string& name, const std::string& letters);

/// Sequences of the first record in a FASTA file.
std::string read_fasta_first(const std::string& text);

/// Fixed-column ATOM records for the three backbone atoms of each residue.
std::string to_pdb(const BackboneStructure& s);

}  // namespace rider::io
