// Degraded two-way relay channel: Z = X_A xor X_B observed through
// Y = mu(X_A) + mu(X_B) + N(0, sigma^2), plus the information-rate integrals
// for the compute-and-forward (CAF) and separation-decoding (SD) schemes.
#pragma once

#include <cstdint>
#include <variant>

#include "cafde/rng.hpp"

namespace cafde {

inline double gauss_pdf(double y, double mean, double sigma2) {
  const double d = y - mean;
  return std::exp(-d * d / (2.0 * sigma2)) * 0.3989422804014326779 / std::sqrt(sigma2);
}

// ln cosh(x) without overflow for large |x|.
inline double log_cosh(double x) {
  const double a = std::fabs(x);
  return a - 0.6931471805599453094 + std::log1p(std::exp(-2.0 * a));
}

// The virtual single-input channel seen by the relay once it targets the
// XOR word. Conditioned on z=1 the output is N(0, sigma^2); conditioned on
// z=0 it is an equal mixture of N(-2, sigma^2) and N(+2, sigma^2).
class DegradedChannel {
 public:
  explicit DegradedChannel(double sigma);

  double sigma() const { return sigma_; }

  // L[y|z]
  double likelihood(double y, int z) const {
    const double s2 = sigma_ * sigma_;
    if (z == 1) return gauss_pdf(y, 0.0, s2);
    return 0.5 * gauss_pdf(y, -2.0, s2) + 0.5 * gauss_pdf(y, 2.0, s2);
  }

  // ln(L[y|0] / L[y|1]) = ln cosh(2y/sigma^2) - 2/sigma^2
  double llr(double y) const { return log_cosh(2.0 * y * inv_sigma2_) - 2.0 * inv_sigma2_; }

  double sample_output(int z, Rng& rng) const {
    double mean = 0.0;
    if (z == 0) mean = rng.bit() ? 2.0 : -2.0;
    return mean + sigma_ * rng.gaussian();
  }

  // Everything of interest lies within a few sigma of the outer means.
  double support_radius() const { return 2.0 + 12.0 * sigma_; }

 private:
  double sigma_;
  double inv_sigma2_;
};

// BPSK over AWGN, y = (1 - 2z) + noise. Used as a symmetric-channel
// regression anchor for the DE engine ((3,6) BP threshold 0.8809).
class BiAwgnChannel {
 public:
  explicit BiAwgnChannel(double sigma);

  double sigma() const { return sigma_; }
  double likelihood(double y, int z) const {
    return gauss_pdf(y, z == 0 ? 1.0 : -1.0, sigma_ * sigma_);
  }
  double llr(double y) const { return 2.0 * y * inv_sigma2_; }
  double sample_output(int z, Rng& rng) const {
    return (z == 0 ? 1.0 : -1.0) + sigma_ * rng.gaussian();
  }

 private:
  double sigma_;
  double inv_sigma2_;
};

// Adapter that swaps which conditioning label is called "0"; the decoder-side
// LLR flips sign accordingly. Exists so tests can assert label-relabeling
// invariance of the DE machinery.
template <class Channel>
class LabelFlipped {
 public:
  explicit LabelFlipped(Channel base) : base_(std::move(base)) {}
  double likelihood(double y, int z) const { return base_.likelihood(y, 1 - z); }
  double llr(double y) const { return -base_.llr(y); }
  double sample_output(int z, Rng& rng) const { return base_.sample_output(1 - z, rng); }

 private:
  Channel base_;
};

// Channel family usable by the DE engine. Dispatch happens once per sweep.
using ChannelVariant = std::variant<DegradedChannel, BiAwgnChannel, LabelFlipped<DegradedChannel>>;

enum class Scheme { kCaf, kSd };

// Symmetric information rate I(Y; X_A xor X_B) of the degraded channel, in bits.
double sir_caf(const DegradedChannel& ch, double quad_tol = 1e-6);

// Joint mutual information rate I(Y; X_A, X_B) = h(Y) - (1/2) log2(2 pi e sigma^2), in bits.
double mi_sd(const DegradedChannel& ch, double quad_tol = 1e-6);

// Noise threshold at which the scheme's information rate equals the code rate:
// sir_caf(sigma) = rate (CAF), or mi_sd(sigma) = 2 * rate (SD, per-user rate on
// the symmetric-rate point). Bisection to |delta sigma| <= sigma_tol.
double sir_threshold(Scheme scheme, double rate, double sigma_tol = 1e-4);

}  // namespace cafde
