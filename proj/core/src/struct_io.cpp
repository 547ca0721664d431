#include "rider/struct_io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <optional>
#include <sstream>

namespace rider::io {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

// Column slice of a fixed-width record, 1-based inclusive bounds.
std::string cols(const std::string& line, std::size_t first, std::size_t last) {
  if (line.size() < first) return "";
  return line.substr(first - 1, std::min(last, line.size()) - first + 1);
}

double parse_coord(const std::string& field, std::size_t line_no) {
  const std::string t = trim(field);
  if (t.empty())
    throw ParseError("line " + std::to_string(line_no) + ": missing coordinate field");
  try {
    std::size_t used = 0;
    double v = std::stod(t, &used);
    if (used != t.size() || !std::isfinite(v))
      throw ParseError("");
    return v;
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": malformed coordinate '" + t + "'");
  }
}

std::optional<Base> base_from_residue_name(const std::string& raw) {
  const std::string t = trim(raw);
  if (t == "A") return Base::A;
  if (t == "C") return Base::C;
  if (t == "G") return Base::G;
  if (t == "U") return Base::U;
  return std::nullopt;
}

struct PendingResidue {
  Base base = Base::A;
  std::optional<Eigen::Vector3d> p, c4p, n_glyco;
  bool n_is_n9 = false;
};

}  // namespace

char base_to_char(Base b) {
  static constexpr char kLetters[] = {'A', 'C', 'G', 'U'};
  return kLetters[static_cast<int>(b)];
}

Base char_to_base(char c) {
  switch (std::toupper(static_cast<unsigned char>(c))) {
    case 'A': return Base::A;
    case 'C': return Base::C;
    case 'G': return Base::G;
    case 'U': return Base::U;
    default:
      throw AlphabetError(std::string("unknown nucleotide letter '") + c + "'");
  }
}

bool is_purine(Base b) { return b == Base::A || b == Base::G; }

ResidueAtoms ResidueAtoms::make(Base base, const Eigen::Vector3d& p, const Eigen::Vector3d& c4p,
                                const Eigen::Vector3d& n_glyco) {
  ResidueAtoms r;
  r.base = base;
  r.p = p;
  r.c4p = c4p;
  r.n_glyco = n_glyco;
  r.centroid = (p + c4p + n_glyco) / 3.0;
  return r;
}

std::string BackboneStructure::sequence() const {
  std::string s;
  s.reserve(residues.size());
  for (const auto& r : residues) s.push_back(base_to_char(r.base));
  return s;
}

Eigen::MatrixXd BackboneStructure::c4p_points() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(residues.size()), 3);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) = residues[i].c4p.transpose();
  return m;
}

Eigen::MatrixXd BackboneStructure::centroid_points() const {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(residues.size()), 3);
  for (Eigen::Index i = 0; i < m.rows(); ++i) m.row(i) = residues[i].centroid.transpose();
  return m;
}

ParsedBackbone parse_pdb_backbone(const std::string& text, const std::string& source) {
  if (trim(text).empty()) throw ParseError("empty structure file");

  // chain -> (resseq -> pending residue), residue order within a chain by resseq
  std::map<char, std::map<int, PendingResidue>> chains;
  std::vector<char> chain_order;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (cols(line, 1, 6) != "ATOM  ") continue;
    const std::string altloc = cols(line, 17, 17);
    if (!altloc.empty() && altloc != " " && altloc != "A") continue;
    const auto base = base_from_residue_name(cols(line, 18, 20));
    if (!base) continue;

    const std::string atom = trim(cols(line, 13, 16));
    const bool want_n9 = is_purine(*base);
    const bool is_p = (atom == "P");
    const bool is_c4p = (atom == "C4'");
    const bool is_n = (want_n9 && atom == "N9") || (!want_n9 && atom == "N1");
    if (!is_p && !is_c4p && !is_n) continue;

    const std::string chain_field = cols(line, 22, 22);
    const char chain = chain_field.empty() ? ' ' : chain_field[0];
    const std::string resseq_str = trim(cols(line, 23, 26));
    int resseq = 0;
    const auto rc =
        std::from_chars(resseq_str.data(), resseq_str.data() + resseq_str.size(), resseq);
    if (rc.ec != std::errc() || rc.ptr != resseq_str.data() + resseq_str.size())
      throw ParseError("line " + std::to_string(line_no) + ": malformed residue number '" +
                       resseq_str + "'");

    Eigen::Vector3d xyz(parse_coord(cols(line, 31, 38), line_no),
                        parse_coord(cols(line, 39, 46), line_no),
                        parse_coord(cols(line, 47, 54), line_no));

    if (chains.find(chain) == chains.end()) chain_order.push_back(chain);
    PendingResidue& pr = chains[chain][resseq];
    pr.base = *base;
    pr.n_is_n9 = want_n9;
    if (is_p && !pr.p) pr.p = xyz;
    if (is_c4p && !pr.c4p) pr.c4p = xyz;
    if (is_n && !pr.n_glyco) pr.n_glyco = xyz;
  }

  // Keep the first chain (in file order) that yields a complete residue.
  for (char chain : chain_order) {
    BackboneStructure s;
    s.chain_id = std::string(1, chain);
    s.source = source;
    std::size_t dropped = 0;
    for (const auto& [resseq, pr] : chains[chain]) {
      (void)resseq;
      if (pr.p && pr.c4p && pr.n_glyco) {
        s.residues.push_back(ResidueAtoms::make(pr.base, *pr.p, *pr.c4p, *pr.n_glyco));
      } else {
        ++dropped;
      }
    }
    if (!s.residues.empty()) return ParsedBackbone{std::move(s), dropped};
  }
  throw ParseError("no complete RNA residues found (need P, C4' and N1/N9 per residue)");
}

RnaSequence sequence_to_onehot(const std::string& letters) {
  if (letters.empty()) throw AlphabetError("empty sequence");
  RnaSequence seq;
  seq.letters.reserve(letters.size());
  seq.onehot = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(letters.size()), kNumBases);
  for (Eigen::Index i = 0; i < seq.onehot.rows(); ++i) {
    const Base b = char_to_base(letters[static_cast<std::size_t>(i)]);
    seq.letters.push_back(base_to_char(b));
    seq.onehot(i, static_cast<int>(b)) = 1.0;
  }
  return seq;
}

std::string decode_argmax(const Eigen::MatrixXd& x0_hat) {
  if (x0_hat.cols() != kNumBases)
    throw ShapeError("decode_argmax expects 4 columns, got " + std::to_string(x0_hat.cols()));
  std::string letters;
  letters.reserve(static_cast<std::size_t>(x0_hat.rows()));
  for (Eigen::Index i = 0; i < x0_hat.rows(); ++i) {
    int best = 0;
    for (int c = 1; c < kNumBases; ++c)
      if (x0_hat(i, c) > x0_hat(i, best)) best = c;  // ties keep the lowest index
    letters.push_back(base_to_char(static_cast<Base>(best)));
  }
  return letters;
}

std::string to_fasta(const std::string& name, const std::string& letters) {
  std::string out = ">" + name + "\n";
  for (std::size_t i = 0; i < letters.size(); i += 60) {
    out += letters.substr(i, 60);
    out += '\n';
  }
  return out;
}

std::string read_fasta_first(const std::string& text) {
  std::istringstream in(text);
  std::string line, seq;
  bool in_record = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '>') {
      if (in_record) break;
      in_record = true;
      continue;
    }
    if (in_record) seq += trim(line);
  }
  if (seq.empty()) throw ParseError("no FASTA record found");
  return seq;
}

std::string to_pdb(const BackboneStructure& s) {
  std::string out;
  char buf[96];
  const char chain = s.chain_id.empty() ? 'A' : s.chain_id[0];
  int serial = 1;
  for (std::size_t i = 0; i < s.residues.size(); ++i) {
    const auto& r = s.residues[i];
    const char* n_name = is_purine(r.base) ? " N9 " : " N1 ";
    const struct {
      const char* name;
      const Eigen::Vector3d* xyz;
    } atoms[] = {{" P  ", &r.p}, {" C4'", &r.c4p}, {n_name, &r.n_glyco}};
    for (const auto& a : atoms) {
      std::snprintf(buf, sizeof(buf),
                    "ATOM  %5d %s   %c %c%4d    %8.3f%8.3f%8.3f  1.00  0.00\n", serial++, a.name,
                    base_to_char(r.base), chain, static_cast<int>(i + 1), (*a.xyz)(0), (*a.xyz)(1),
                    (*a.xyz)(2));
      out += buf;
    }
  }
  out += "END\n";
  return out;
}

}  // namespace rider::io
