#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "cafde/channel.hpp"
#include "cafde/quadrature.hpp"

using namespace cafde;

TEST_CASE("likelihood values at sigma=1") {
  DegradedChannel ch(1.0);
  CHECK(ch.likelihood(0.0, 1) == doctest::Approx(0.3989422804014327).epsilon(1e-12));
  CHECK(ch.likelihood(0.0, 0) == doctest::Approx(0.05399096651318806).epsilon(1e-12));
  // the z=0 mixture is even in y
  for (double y : {0.5, 1.0, 2.0, 3.7}) CHECK(ch.likelihood(y, 0) == ch.likelihood(-y, 0));
}

TEST_CASE("sigma must be positive") {
  CHECK_THROWS_AS(DegradedChannel(0.0), std::invalid_argument);
  CHECK_THROWS_AS(DegradedChannel(-1.0), std::invalid_argument);
}

TEST_CASE("llr closed form and stability") {
  DegradedChannel ch(1.0);
  CHECK(ch.llr(0.0) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(ch.llr(10.0) == doctest::Approx(17.30685281944005).epsilon(1e-12));
  // even in y, and finite far into the tails where cosh overflows
  for (double y : {0.3, 1.0, 5.0, 40.0, 400.0}) {
    CHECK(ch.llr(y) == ch.llr(-y));
    CHECK(std::isfinite(ch.llr(y)));
  }
}

TEST_CASE("llr equals the likelihood log-ratio to 1e-9 relative") {
  for (double sigma : {0.4, 0.7, 1.0, 1.5}) {
    DegradedChannel ch(sigma);
    for (double y = -8.0; y <= 8.0; y += 0.37) {
      const double l0 = ch.likelihood(y, 0), l1 = ch.likelihood(y, 1);
      if (l0 <= 0.0 || l1 <= 0.0) continue;
      const double direct = std::log(l0 / l1);
      CHECK(std::fabs(direct - ch.llr(y)) <= 1e-9 * std::max(1.0, std::fabs(direct)));
    }
  }
}

TEST_CASE("likelihoods are normalized") {
  for (double sigma : {0.3, 0.805, 1.2}) {
    DegradedChannel ch(sigma);
    for (int z : {0, 1}) {
      const double mass = integrate([&](double y) { return ch.likelihood(y, z); },
                                    -ch.support_radius(), ch.support_radius(), 1e-10)
                              .value;
      CHECK(mass == doctest::Approx(1.0).epsilon(1e-8));
    }
  }
}

TEST_CASE("information rates reproduce the quadrature oracle") {
  // frozen values from an independent scipy quadrature of the same integrals
  const struct {
    double sigma, sir, mi;
  } table[] = {
      {0.2, 0.999998243, 1.499998243},   {0.5, 0.877776327, 1.377708856},
      {0.7, 0.624350774, 1.119985860},   {0.805, 0.500335134, 0.987383929},
      {1.0, 0.325245589, 0.781656731},   {1.5, 0.116092064, 0.456918746},
  };
  for (const auto& row : table) {
    DegradedChannel ch(row.sigma);
    CHECK(sir_caf(ch) == doctest::Approx(row.sir).epsilon(5e-6));
    CHECK(mi_sd(ch) == doctest::Approx(row.mi).epsilon(5e-6));
  }
}

TEST_CASE("table-one operating points") {
  CHECK(sir_caf(DegradedChannel(0.805)) == doctest::Approx(0.5).epsilon(4e-3));
  CHECK(sir_caf(DegradedChannel(0.666)) == doctest::Approx(2.0 / 3.0).epsilon(3e-3));
  CHECK(mi_sd(DegradedChannel(0.794)) == doctest::Approx(1.0).epsilon(4e-3));
  CHECK(mi_sd(DegradedChannel(0.537)) == doctest::Approx(4.0 / 3.0).epsilon(3e-3));
}

TEST_CASE("limits: noiseless determines the xor, large noise kills the pair rate") {
  CHECK(sir_caf(DegradedChannel(0.05)) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(mi_sd(DegradedChannel(12.0)) < 0.01);
}

TEST_CASE("rates decrease in sigma and respect the data-processing order") {
  double prev_sir = 2.0, prev_mi = 3.0;
  for (double sigma = 0.2; sigma <= 1.51; sigma += 0.1) {
    DegradedChannel ch(sigma);
    const double s = sir_caf(ch), m = mi_sd(ch);
    CHECK(s < prev_sir);
    CHECK(m < prev_mi);
    CHECK(s <= 1.0 + 1e-9);
    CHECK(m <= 2.0);
    CHECK(s <= m + 1e-9);  // the xor is a function of the pair
    prev_sir = s;
    prev_mi = m;
  }
}

TEST_CASE("sir_threshold reproduces table one and the oracle") {
  CHECK(sir_threshold(Scheme::kCaf, 0.5) == doctest::Approx(0.805).epsilon(2.5e-3));
  CHECK(sir_threshold(Scheme::kCaf, 2.0 / 3.0) == doctest::Approx(0.66698).epsilon(1e-3));
  CHECK(sir_threshold(Scheme::kCaf, 1.0 / 3.0) == doctest::Approx(0.98888).epsilon(1e-3));
  CHECK(sir_threshold(Scheme::kSd, 0.5) == doctest::Approx(0.79452).epsilon(1e-3));
  CHECK(sir_threshold(Scheme::kSd, 2.0 / 3.0) == doctest::Approx(0.53791).epsilon(1e-3));
  CHECK(sir_threshold(Scheme::kSd, 1.0 / 3.0) == doctest::Approx(1.13895).epsilon(1e-3));
}

TEST_CASE("sir_threshold is decreasing in the rate and rejects impossible asks") {
  CHECK(sir_threshold(Scheme::kCaf, 0.3) > sir_threshold(Scheme::kCaf, 0.6));
  CHECK_THROWS_AS(sir_threshold(Scheme::kSd, 0.9), std::runtime_error);  // sum rate 1.8 > 1.5
  CHECK_THROWS_AS(sir_threshold(Scheme::kCaf, 1.2), std::invalid_argument);
}

TEST_CASE("sample_output moments and determinism") {
  const int draws = 1000000;
  for (int z : {0, 1}) {
    DegradedChannel ch(0.8);
    Rng rng(key_mix(42, z));
    double sum = 0.0, sq = 0.0;
    for (int i = 0; i < draws; ++i) {
      const double y = ch.sample_output(z, rng);
      sum += y;
      sq += y * y;
    }
    const double mean = sum / draws;
    const double var = sq / draws - mean * mean;
    const double expect_var = z == 1 ? 0.64 : 4.64;
    // 3 standard errors of the mean / variance estimators
    CHECK(std::fabs(mean) < 3.0 * std::sqrt(expect_var / draws));
    CHECK(std::fabs(var - expect_var) < 3.0 * std::sqrt(2.0) * expect_var / std::sqrt(draws) * 2.0);
  }
  Rng a(key_mix(7, 1)), b(key_mix(7, 1));
  DegradedChannel ch(0.6);
  for (int i = 0; i < 1000; ++i) CHECK(ch.sample_output(0, a) == ch.sample_output(0, b));
}

TEST_CASE("sampler matches the likelihood (chi-square goodness of fit)") {
  const double sigma = 0.8;
  DegradedChannel ch(sigma);
  const int draws = 1000000;
  const int inner_bins = 58;
  const double lo = -(2.0 + 3.0 * sigma), hi = 2.0 + 3.0 * sigma;
  const double width = (hi - lo) / inner_bins;

  for (int z : {0, 1}) {
    std::vector<long> hist(inner_bins + 2, 0);
    Rng rng(key_mix(2024, z));
    for (int i = 0; i < draws; ++i) {
      const double y = ch.sample_output(z, rng);
      if (y < lo)
        hist[0]++;
      else if (y >= hi)
        hist[inner_bins + 1]++;
      else
        hist[1 + static_cast<int>((y - lo) / width)]++;
    }
    // expected bin mass from the gaussian cdf (independent of our quadrature)
    const auto cdf = [&](double y) {
      const auto phi = [&](double mu) { return 0.5 * std::erfc(-(y - mu) / (sigma * std::sqrt(2.0))); };
      return z == 1 ? phi(0.0) : 0.5 * phi(-2.0) + 0.5 * phi(2.0);
    };
    double chi2 = 0.0;
    for (int b = 0; b < inner_bins + 2; ++b) {
      const double a = b == 0 ? -1e9 : lo + (b - 1) * width;
      const double bnd = b == inner_bins + 1 ? 1e9 : lo + b * width;
      const double expect = draws * (cdf(bnd) - cdf(a));
      const double d = hist[b] - expect;
      chi2 += d * d / expect;
    }
    CHECK(chi2 < 108.163);  // chi2 ppf(0.9999, dof=59)
  }
}

TEST_CASE("biawgn channel basics") {
  BiAwgnChannel ch(0.88);
  CHECK(ch.llr(0.5) == doctest::Approx(2.0 * 0.5 / (0.88 * 0.88)));
  Rng rng(3);
  double sum = 0.0;
  for (int i = 0; i < 200000; ++i) sum += ch.sample_output(0, rng);
  CHECK(sum / 200000 == doctest::Approx(1.0).epsilon(0.01));
}

TEST_CASE("label flip inverts the llr and swaps the laws") {
  DegradedChannel base(0.7);
  LabelFlipped<DegradedChannel> flipped(base);
  for (double y : {-1.0, 0.0, 2.5}) {
    CHECK(flipped.llr(y) == -base.llr(y));
    CHECK(flipped.likelihood(y, 0) == base.likelihood(y, 1));
    CHECK(flipped.likelihood(y, 1) == base.likelihood(y, 0));
  }
}
