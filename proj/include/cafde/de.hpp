// Population-dynamics density evolution for the degraded two-way relay
// channel: the asymmetric-channel cavity recursions solved by resampling
// populations of N LLR samples, for regular ensembles and (dl,dr,L) coupled
// protograph chains.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <variant>
#include <vector>

#include "cafde/channel.hpp"
#include "cafde/codes.hpp"

namespace cafde {

struct DEOptions {
  int population_size = 100000;  // N samples per conditional density
  int max_sweeps = 2000;         // T
  double stop_ber = 1e-5;
  int stop_streak = 10;   // consecutive sweeps below stop_ber before declaring decodable
  double llr_clip = 300.0;
  double tanh_clip = 1e-15;  // distance from +-1 at which tanh products are clipped
  int workers = 0;           // 0 = all hardware threads

  // Optional early-undecodable rule: stop when the mean-over-bundles BER has
  // improved by less than stall_min_delta over the last stall_window sweeps
  // while still above stall_min_ber. Disabled (0) by default; threshold
  // searches switch it on to avoid running hopeless probes to T.
  int stall_window = 0;
  double stall_min_delta = 1e-4;
  double stall_min_ber = 1e-2;
};

using GraphVariant = std::variant<RegularEnsemble, Protograph>;

// Draws `count` conditioning bits uniformly over the parity-constrained set
// {b : z xor b_1 xor ... xor b_count = 0}: count-1 free bits, the last one
// forced. Bit s of the return value is the s-th conditioning bit. This is the
// draw the check-side population update performs for every sample.
inline std::uint32_t draw_parity_bits(int count, int z, Rng& rng) {
  std::uint32_t bits = 0;
  int parity = z;
  for (int s = 0; s < count - 1; ++s) {
    const int b = rng.bit();
    bits |= static_cast<std::uint32_t>(b) << s;
    parity ^= b;
  }
  bits |= static_cast<std::uint32_t>(parity) << (count - 1);
  return bits;
}

// One DE run's worth of state: every conditional population (4 for a regular
// ensemble, 4*L*dl directed-edge-type populations for a coupled chain), the
// sweep counter, and the channel. Sweeps are synchronous: the check-side
// populations are rebuilt from the previous sweep's variable-side populations,
// then the variable-side populations from the fresh check-side ones.
class DensityEvolution {
 public:
  DensityEvolution(GraphVariant graph, ChannelVariant channel, DEOptions opts, std::uint64_t seed);

  void step();

  // Posterior-message BER estimate after the current sweep: dl incoming check
  // messages plus a fresh channel draw per sample; a sample at exactly zero
  // counts as half an error. Size 1 for regular ensembles, else one entry per
  // bundle. Requires iteration() >= 1.
  Eigen::ArrayXd estimate_ber() const;

  int iteration() const { return iteration_; }
  int num_bundles() const { return coupled() ? proto().chain_length() : 1; }
  int num_populations() const { return static_cast<int>(var_pops_.size() + chk_pops_.size()); }
  bool coupled() const { return std::holds_alternative<Protograph>(graph_); }

  const DEOptions& options() const { return opts_; }

  // Test access. For regular ensembles bundle/slot must be 0.
  const Eigen::ArrayXd& variable_population(int bundle, int slot, int z) const {
    return var_pops_[pop_index(bundle, slot, z)];
  }
  const Eigen::ArrayXd& check_population(int bundle, int slot, int z) const {
    return chk_pops_[pop_index(bundle, slot, z)];
  }

 private:
  const Protograph& proto() const { return std::get<Protograph>(graph_); }
  const RegularEnsemble& regular() const { return std::get<RegularEnsemble>(graph_); }
  int pop_index(int bundle, int slot, int z) const {
    return coupled() ? (bundle * proto().dl() + slot) * 2 + z : z;
  }

  template <class Chan>
  void sweep_regular(const Chan& ch);
  template <class Chan>
  void sweep_coupled(const Chan& ch);
  template <class Chan>
  Eigen::ArrayXd ber_regular(const Chan& ch) const;
  template <class Chan>
  Eigen::ArrayXd ber_coupled(const Chan& ch) const;

  void refresh_tanh_tables();

  GraphVariant graph_;
  ChannelVariant channel_;
  DEOptions opts_;
  std::uint64_t seed_;
  int iteration_ = 0;
  int workers_ = 1;

  std::vector<Eigen::ArrayXd> var_pops_, chk_pops_;       // current populations
  std::vector<Eigen::ArrayXd> var_scratch_, chk_scratch_;  // next sweep's buffers
  std::vector<Eigen::ArrayXd> tanh_tbl_;                   // tanh(clip(P)/2) per variable pop
};

struct DEResult {
  bool decodable = false;
  bool stalled = false;
  int sweeps = 0;
  int first_zero_sweep = -1;  // first sweep with every bundle BER exactly zero
  Eigen::MatrixXd ber_trace;  // sweeps x bundles
};

// Runs DE until the stop rule declares the channel decodable, the stall rule
// fires, or max_sweeps elapse (then decodable = final BER < stop_ber).
DEResult run_de(const GraphVariant& graph, const ChannelVariant& channel, const DEOptions& opts,
                std::uint64_t seed);

}  // namespace cafde
