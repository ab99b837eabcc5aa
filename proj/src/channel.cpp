#include "cafde/channel.hpp"

#include <cmath>
#include <stdexcept>

#include "cafde/quadrature.hpp"

namespace cafde {

namespace {

constexpr double kLog2E = 1.4426950408889634074;  // log2(e)

double plog2p(double p) { return p > 0.0 ? p * std::log2(p) : 0.0; }

// differential entropy -int f log2 f over [-r, r]
template <class F>
double entropy_bits(F&& f, double r, double tol, const char* what) {
  return integrate_or_throw([&](double y) { return -plog2p(f(y)); }, -r, r, tol, what);
}

}  // namespace

DegradedChannel::DegradedChannel(double sigma) : sigma_(sigma), inv_sigma2_(1.0 / (sigma * sigma)) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
}

BiAwgnChannel::BiAwgnChannel(double sigma) : sigma_(sigma), inv_sigma2_(1.0 / (sigma * sigma)) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw std::invalid_argument("sigma must be positive");
}

double sir_caf(const DegradedChannel& ch, double quad_tol) {
  const double r = ch.support_radius();
  const double s2 = ch.sigma() * ch.sigma();
  const double h_out = entropy_bits(
      [&](double y) { return 0.5 * ch.likelihood(y, 0) + 0.5 * ch.likelihood(y, 1); }, r, quad_tol,
      "output entropy");
  const double h_given0 = entropy_bits([&](double y) { return ch.likelihood(y, 0); }, r, quad_tol,
                                       "conditional entropy z=0");
  // h(Y|z=1) is a pure Gaussian entropy, in closed form.
  const double h_given1 = 0.5 * std::log2(2.0 * M_PI * s2) + 0.5 * kLog2E;
  return h_out - 0.5 * h_given0 - 0.5 * h_given1;
}

double mi_sd(const DegradedChannel& ch, double quad_tol) {
  const double r = ch.support_radius();
  const double s2 = ch.sigma() * ch.sigma();
  const double h_out = entropy_bits(
      [&](double y) { return 0.5 * ch.likelihood(y, 0) + 0.5 * ch.likelihood(y, 1); }, r, quad_tol,
      "output entropy");
  return h_out - (0.5 * std::log2(2.0 * M_PI * s2) + 0.5 * kLog2E);
}

double sir_threshold(Scheme scheme, double rate, double sigma_tol) {
  if (!(rate > 0.0 && rate < 1.0)) throw std::invalid_argument("rate must lie in (0,1)");
  const double target = (scheme == Scheme::kCaf) ? rate : 2.0 * rate;
  const auto value = [&](double sigma) {
    DegradedChannel ch(sigma);
    return (scheme == Scheme::kCaf) ? sir_caf(ch) : mi_sd(ch);
  };
  double lo = 0.05, hi = 3.0;
  if (value(lo) < target)
    throw std::runtime_error("rate unachievable: information rate below target even at sigma=0.05");
  if (value(hi) > target)
    throw std::runtime_error("rate achievable everywhere in the bracket: sigma_sym above 3.0");
  // information rate decreases in sigma; keep value(lo) >= target > value(hi)
  while (hi - lo > sigma_tol) {
    const double mid = 0.5 * (lo + hi);
    (value(mid) >= target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace cafde
