// Code ensembles: regular (dl,dr) LDPC codes, the (dl,dr,L) spatially coupled
// protograph chain, and sampled finite-length instances for validation.
#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "cafde/f2.hpp"
#include "cafde/rng.hpp"

namespace cafde {

struct RegularEnsemble {
  int dl = 3;  // variable degree
  int dr = 6;  // check degree

  RegularEnsemble(int dl_, int dr_);
  double design_rate() const { return 1.0 - static_cast<double>(dl) / dr; }
};

// Protograph of a (dl, dr, L) chain: L bundles of k = dr/dl variable nodes and
// L + 2*dhat check nodes, dhat = (dl-1)/2. Every variable node carries dl edge
// slots; slot w of a variable in bundle i attaches to check i + offset(w).
// Each (bundle, slot) pair therefore contributes k parallel edges to its check.
// The uncoupled base graph (all slots on one check) is the L=1, dhat=0 case.
class Protograph {
 public:
  // Terminated chain construction with slot offsets 0..2*dhat.
  static Protograph coupled(int dl, int dr, int L);
  // Single-copy base protograph: k variables, one check, dl parallel slots.
  static Protograph uncoupled(int dl, int dr);

  int dl() const { return dl_; }
  int dr() const { return dr_; }
  int chain_length() const { return L_; }
  int k() const { return k_; }
  int dhat() const { return dhat_; }
  int num_checks() const { return num_checks_; }
  int num_variables() const { return L_ * k_; }

  int check_of_slot(int bundle, int slot) const { return slot_check_[bundle * dl_ + slot]; }
  // (bundle, slot) pairs incident to check a; each stands for k parallel edges.
  const std::vector<std::pair<int, int>>& check_incidence(int a) const { return incidence_[a]; }
  int check_degree(int a) const { return k_ * static_cast<int>(incidence_[a].size()); }

  // 1 - (L + 2*dhat) / (k*L); may be non-positive for degenerately short chains.
  double design_rate() const {
    return 1.0 - static_cast<double>(L_ + 2 * dhat_) / (static_cast<double>(k_) * L_);
  }

 private:
  Protograph() = default;
  void build_incidence();

  int dl_ = 0, dr_ = 0, L_ = 0, k_ = 0, dhat_ = 0, num_checks_ = 0;
  std::vector<int> slot_check_;  // [bundle * dl + slot] -> check index
  std::vector<std::vector<std::pair<int, int>>> incidence_;
};

struct CodeOrigin {
  std::string description;
  std::uint64_t seed = 0;
  int lift = 0;             // 0 for configuration-model samples
  int rank_deficiency = 0;  // m - rank(H)
};

// A concrete sampled code: sparse parity-check adjacency plus the echelon form
// of H for codeword sampling and generator extraction.
class CodeInstance {
 public:
  CodeInstance(int n, std::vector<std::vector<int>> check_to_var, CodeOrigin origin);

  int block_length() const { return n_; }
  int num_checks() const { return static_cast<int>(check_to_var_.size()); }
  int dimension() const { return n_ - echelon_.rank; }
  const CodeOrigin& origin() const { return origin_; }

  const std::vector<std::vector<int>>& check_neighbors() const { return check_to_var_; }
  const std::vector<std::vector<int>>& var_neighbors() const { return var_to_check_; }

  bool satisfies_checks(const BitVector& word) const;

  // Uniform random codeword.
  BitVector sample_codeword(Rng& rng) const;

  // Generator rows (null-space basis of H), dimension() of them.
  std::vector<BitVector> generator_rows() const;

  // One line per check: sorted variable indices. Leading "n m" header line.
  void serialize(std::ostream& os) const;
  static CodeInstance parse(std::istream& is, CodeOrigin origin = {});

 private:
  int n_;
  std::vector<std::vector<int>> check_to_var_;
  std::vector<std::vector<int>> var_to_check_;
  EchelonForm echelon_;
  CodeOrigin origin_;
};

// Configuration-model sample of a (dl, dr)-regular code with n variables.
// Double edges are removed by bounded socket-swap repair passes; throws if the
// repair budget (100 passes) is exhausted.
CodeInstance sample_code(const RegularEnsemble& ens, int n, std::uint64_t seed);

// Random-permutation lift of a protograph, lift copies per protograph node.
CodeInstance sample_code(const Protograph& proto, int lift, std::uint64_t seed);

}  // namespace cafde
