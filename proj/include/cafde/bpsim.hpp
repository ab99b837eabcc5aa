// Finite-length validation: sum-product decoding of sampled codes over the
// degraded channel, Monte-Carlo BER/FER estimation, and a brute-force ML
// oracle for tiny codes.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "cafde/channel.hpp"
#include "cafde/codes.hpp"

namespace cafde {

struct DecodeOutcome {
  BitVector estimate;
  bool converged = false;  // hard decision satisfies every check
  int iterations_used = 0;
  Eigen::ArrayXd posterior_llrs;
};

// Flooding-schedule sum-product decoder on the code's Tanner graph. Channel
// LLRs come from ch.llr; clipping matches the DE engine (LLR +-300 before
// tanh, tanh products kept 1e-15 away from +-1). Early exit as soon as the
// hard decision satisfies all checks; non-convergence is an outcome, not an
// error.
DecodeOutcome bp_decode(const CodeInstance& code, const Eigen::ArrayXd& y,
                        const DegradedChannel& ch, int max_iter);
DecodeOutcome bp_decode(const CodeInstance& code, const Eigen::ArrayXd& y, const BiAwgnChannel& ch,
                        int max_iter);

// As bp_decode, but records the bit error rate against truth after every
// iteration; trace[0] is the channel-only hard decision (aligned with DE
// sweep l = 1), trace[j] follows iteration j.
DecodeOutcome bp_decode_traced(const CodeInstance& code, const Eigen::ArrayXd& y,
                               const DegradedChannel& ch, int max_iter, const BitVector& truth,
                               std::vector<double>& trace);

// Exhaustive maximum-likelihood decoding under the degraded-channel
// likelihood. Ties break toward the lexicographically smallest codeword.
// Rejects codes with dimension above 24.
BitVector ml_decode(const CodeInstance& code, const Eigen::ArrayXd& y, const DegradedChannel& ch);

struct WilsonInterval {
  double lo = 0.0;
  double hi = 0.0;
};

// Wilson score interval at normal quantile zscore (default 1.96, ~95%).
WilsonInterval wilson_interval(long long successes, long long trials, double zscore = 1.96);

struct MonteCarloResult {
  long long frames = 0;
  long long bit_errors = 0;
  long long frame_errors = 0;
  double ber = 0.0, fer = 0.0;
  WilsonInterval ber_ci, fer_ci;
  double avg_iterations = 0.0;
  // Filled when trace_iterations > 0: mean BER after each BP iteration
  // (index 0 = channel-only) and its standard error across frames.
  std::vector<double> per_iteration_ber;
  std::vector<double> per_iteration_se;
};

// Per frame: draw a uniform codeword z, pass it through the channel, decode,
// count bit/frame errors against z. Frames run in parallel with per-frame
// derived seeds; counts do not depend on worker scheduling.
MonteCarloResult monte_carlo(const CodeInstance& code, const DegradedChannel& ch, int frames,
                             int max_iter, std::uint64_t seed, int trace_iterations = 0,
                             int workers = 0);

}  // namespace cafde
