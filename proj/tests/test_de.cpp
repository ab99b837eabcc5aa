#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <bit>
#include <cmath>
#include <vector>

#include "cafde/de.hpp"

using namespace cafde;

namespace {

DEOptions small_opts(int n = 10000, int t = 100) {
  DEOptions o;
  o.population_size = n;
  o.max_sweeps = t;
  return o;
}

// two-sample Kolmogorov-Smirnov statistic
double ks_statistic(Eigen::ArrayXd a, Eigen::ArrayXd b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const auto na = a.size(), nb = b.size();
  double d = 0.0;
  Eigen::Index i = 0, j = 0;
  while (i < na && j < nb) {
    if (a[i] <= b[j])
      ++i;
    else
      ++j;
    d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return d;
}

}  // namespace

TEST_CASE("initialization: every sample is zero, population counts match") {
  DensityEvolution unc(RegularEnsemble(3, 6), DegradedChannel(0.7), small_opts(2000, 10), 1);
  CHECK(unc.num_populations() == 4);
  for (int z : {0, 1}) {
    CHECK((unc.variable_population(0, 0, z) == 0.0).all());
    CHECK((unc.check_population(0, 0, z) == 0.0).all());
  }

  DensityEvolution cpl(Protograph::coupled(3, 6, 5), DegradedChannel(0.7), small_opts(2000, 10), 1);
  CHECK(cpl.num_populations() == 4 * 5 * 3);  // 4*L*dl
  CHECK((cpl.variable_population(3, 1, 0) == 0.0).all());
}

TEST_CASE("option validation") {
  CHECK_THROWS_AS(DensityEvolution(RegularEnsemble(3, 6), DegradedChannel(0.7),
                                   small_opts(500, 10), 1),
                  std::invalid_argument);
  DEOptions bad = small_opts();
  bad.stop_ber = 0.7;
  CHECK_THROWS_AS(DensityEvolution(RegularEnsemble(3, 6), DegradedChannel(0.7), bad, 1),
                  std::invalid_argument);
  DensityEvolution de(RegularEnsemble(3, 6), DegradedChannel(0.7), small_opts(2000, 10), 1);
  CHECK_THROWS_AS(de.estimate_ber(), std::logic_error);  // needs one sweep first
}

TEST_CASE("parity-conditioned bit draws are uniform over the admissible set") {
  // (3,6): 5 bits, 16 admissible patterns per conditioning
  const int draws = 100000;
  for (int z : {0, 1}) {
    Rng rng(key_mix(99, z));
    std::vector<int> hist(32, 0);
    for (int i = 0; i < draws; ++i) hist[draw_parity_bits(5, z, rng)]++;
    double chi2 = 0.0;
    const double expect = draws / 16.0;
    for (int pat = 0; pat < 32; ++pat) {
      const bool admissible = (std::popcount(static_cast<unsigned>(pat)) % 2) == z % 2;
      if (admissible) {
        const double d = hist[pat] - expect;
        chi2 += d * d / expect;
      } else {
        CHECK(hist[pat] == 0);  // construction enforces the parity constraint
      }
    }
    CHECK(chi2 < 44.263);  // chi2 ppf(0.9999, 15)
  }
}

TEST_CASE("first-sweep BER equals the channel-only error rate") {
  // frozen values from the closed-form threshold integral of the channel law
  const struct {
    double sigma, ber1;
  } rows[] = {{0.5, 0.031815}, {0.7, 0.106251}, {0.8, 0.146005}, {1.2, 0.273980}};
  for (const auto& row : rows) {
    DensityEvolution de(RegularEnsemble(3, 6), DegradedChannel(row.sigma), small_opts(100000, 2),
                        42);
    de.step();
    const double ber = de.estimate_ber()[0];
    const double se = std::sqrt(row.ber1 * (1 - row.ber1) / 200000.0);
    CHECK(std::fabs(ber - row.ber1) < 4.0 * se);
  }
}

TEST_CASE("fixed seed reproduces the trajectory; workers do not matter") {
  const GraphVariant g = RegularEnsemble(3, 6);
  const ChannelVariant ch = DegradedChannel(0.74);
  DEOptions o = small_opts(5000, 30);
  o.workers = 1;
  const DEResult a = run_de(g, ch, o, 7);
  const DEResult b = run_de(g, ch, o, 7);
  o.workers = 2;
  const DEResult c = run_de(g, ch, o, 7);
  CHECK(a.ber_trace == b.ber_trace);
  CHECK(a.ber_trace == c.ber_trace);
  const DEResult d = run_de(g, ch, o, 8);
  CHECK(a.ber_trace != d.ber_trace);
}

TEST_CASE("well below threshold the mean conditional llr grows until the clip binds") {
  DensityEvolution de(RegularEnsemble(3, 6), DegradedChannel(0.5), small_opts(20000, 12), 3);
  double prev_mean = 0.0;
  for (int l = 0; l < 8; ++l) {
    de.step();
    const double mean0 = de.variable_population(0, 0, 0).mean();
    // P(m|0) drifts upward sweep over sweep until the tanh clip saturates it
    if (prev_mean < 60.0) CHECK(mean0 > prev_mean);
    prev_mean = mean0;
  }
  CHECK(prev_mean > 60.0);
  CHECK(de.estimate_ber()[0] == 0.0);
}

TEST_CASE("run_de verdicts far from the threshold") {
  const GraphVariant g = RegularEnsemble(3, 6);
  DEOptions o = small_opts(10000, 400);
  const DEResult dec = run_de(g, DegradedChannel(0.70), o, 5);
  CHECK(dec.decodable);
  CHECK(dec.first_zero_sweep > 0);
  CHECK(dec.sweeps <= 400);

  const DEResult und = run_de(g, DegradedChannel(0.80), o, 5);
  CHECK_FALSE(und.decodable);
  CHECK(und.ber_trace(und.sweeps - 1, 0) > 0.05);  // stalls at a positive fixed point
}

TEST_CASE("stall rule fires early on a hopeless channel and never on a decodable one") {
  const GraphVariant g = RegularEnsemble(3, 6);
  DEOptions o = small_opts(10000, 2000);
  o.stall_window = 100;
  const DEResult und = run_de(g, DegradedChannel(0.9), o, 5);
  CHECK(und.stalled);
  CHECK(und.sweeps < 400);
  const DEResult dec = run_de(g, DegradedChannel(0.70), o, 5);
  CHECK(dec.decodable);
  CHECK_FALSE(dec.stalled);
}

TEST_CASE("BER trace is non-increasing up to sampling noise") {
  const DEResult r = run_de(RegularEnsemble(3, 6), DegradedChannel(0.78), small_opts(20000, 60), 11);
  for (int l = 1; l < r.sweeps; ++l) {
    const double prev = r.ber_trace(l - 1, 0), cur = r.ber_trace(l, 0);
    // the estimator rebuilds the posterior from finite populations, so its
    // spread is wider than the binomial term alone
    const double se = std::sqrt(std::max(prev, 1e-6) * (1 - prev) / 40000.0);
    CHECK(cur <= prev + 5.0 * se + 1e-3);
  }
}

TEST_CASE("estimate_ber edge cases: uninformative and polarized populations") {
  // with sigma enormous the llr carries no information: BER is 1/2 up to noise
  DensityEvolution de(RegularEnsemble(3, 6), DegradedChannel(1e6), small_opts(2000, 3), 1);
  de.step();
  CHECK(de.estimate_ber()[0] == doctest::Approx(0.5).epsilon(0.05));

  // near-noiseless: populations polarize, BER goes to exactly zero
  DensityEvolution sharp(RegularEnsemble(3, 6), DegradedChannel(0.05), small_opts(2000, 4), 1);
  for (int i = 0; i < 3; ++i) sharp.step();
  CHECK(sharp.estimate_ber()[0] == 0.0);
}

TEST_CASE("coupled chain decodes by an edge-inward wave where uncoupled stalls") {
  // sigma 0.78 sits above the uncoupled threshold 0.742 but below the coupled one
  DEOptions o = small_opts(4000, 300);
  const DEResult r = run_de(Protograph::coupled(3, 6, 9), DegradedChannel(0.78), o, 13);
  CHECK(r.decodable);
  // mid-decode snapshot: chain ends are cleaner than the center
  const int mid_sweep = r.first_zero_sweep / 2;
  const Eigen::ArrayXd snap = r.ber_trace.row(mid_sweep - 1).array();
  CHECK(snap[0] < snap[4]);
  CHECK(snap[8] < snap[4]);
  const DEResult unc = run_de(RegularEnsemble(3, 6), DegradedChannel(0.78), o, 13);
  CHECK_FALSE(unc.decodable);
}

TEST_CASE("coupled per-bundle BER is reflection symmetric up to noise") {
  DEOptions o = small_opts(8000, 40);
  DensityEvolution de(Protograph::coupled(3, 6, 9), DegradedChannel(0.80), o, 21);
  for (int l = 0; l < 25; ++l) de.step();
  const Eigen::ArrayXd ber = de.estimate_ber();
  for (int i = 0; i < 4; ++i) {
    const double a = ber[i], b = ber[8 - i];
    const double se = std::sqrt(std::max(a, 1e-4) / 16000.0);
    CHECK(std::fabs(a - b) < 5.0 * se);
  }
}

TEST_CASE("single-copy base protograph reproduces the regular-ensemble DE") {
  DEOptions o = small_opts(20000, 12);
  DensityEvolution reg(RegularEnsemble(3, 6), DegradedChannel(0.76), o, 31);
  DensityEvolution pro(Protograph::uncoupled(3, 6), DegradedChannel(0.76), o, 32);
  for (int l = 0; l < 10; ++l) {
    reg.step();
    pro.step();
  }
  const double ber_reg = reg.estimate_ber()[0];
  const double ber_pro = pro.estimate_ber().mean();
  const double se = std::sqrt(std::max(ber_reg, 1e-4) / 40000.0);
  CHECK(std::fabs(ber_reg - ber_pro) < 5.0 * se);
  // same conditional message law: KS distance within the two-sample band
  const double ks = ks_statistic(reg.variable_population(0, 0, 0), pro.variable_population(0, 0, 0));
  CHECK(ks < 2.5 * std::sqrt(2.0 / 20000.0));
}

TEST_CASE("biawgn regression: conditional populations are mirror images") {
  DEOptions o = small_opts(20000, 25);
  DensityEvolution de(RegularEnsemble(3, 6), BiAwgnChannel(0.92), o, 17);
  for (int l = 0; l < 20; ++l) {
    de.step();
    if (l % 7 != 6) continue;
    const Eigen::ArrayXd p0 = de.variable_population(0, 0, 0);
    const Eigen::ArrayXd p1 = -de.variable_population(0, 0, 1);
    CHECK(ks_statistic(p0, p1) < 2.5 * std::sqrt(2.0 / 20000.0));
  }
}

TEST_CASE("relabeling the conditioning bits leaves the BER unchanged statistically") {
  DEOptions o = small_opts(20000, 15);
  DensityEvolution plain(RegularEnsemble(3, 6), DegradedChannel(0.78), o, 41);
  DensityEvolution flipped(RegularEnsemble(3, 6),
                           LabelFlipped<DegradedChannel>(DegradedChannel(0.78)), o, 42);
  for (int l = 0; l < 12; ++l) {
    plain.step();
    flipped.step();
  }
  const double a = plain.estimate_ber()[0];
  const double b = flipped.estimate_ber()[0];
  const double se = std::sqrt(a * (1 - a) / 40000.0);
  CHECK(std::fabs(a - b) < 5.0 * se);
}

TEST_CASE("trace bookkeeping") {
  const DEResult r = run_de(RegularEnsemble(3, 6), DegradedChannel(0.70), small_opts(4000, 50), 2);
  CHECK(r.ber_trace.rows() == r.sweeps);
  CHECK(r.sweeps <= 50);
  CHECK((r.ber_trace.array() >= 0.0).all());
  CHECK((r.ber_trace.array() <= 0.5 + 3.0 * std::sqrt(0.25 / 8000.0)).all());
}
