#include "cafde/de.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cafde {

namespace {

constexpr std::uint64_t kCheckPhase = 0;
constexpr std::uint64_t kVarPhase = 1;
constexpr std::uint64_t kBerPhase = 2;

inline double atanh2(double p, double clip) {
  p = std::clamp(p, -1.0 + clip, 1.0 - clip);
  return std::log((1.0 + p) / (1.0 - p));
}

int resolve_workers([[maybe_unused]] int requested) {
#ifdef _OPENMP
  return requested > 0 ? requested : omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace

DensityEvolution::DensityEvolution(GraphVariant graph, ChannelVariant channel, DEOptions opts,
                                   std::uint64_t seed)
    : graph_(std::move(graph)), channel_(std::move(channel)), opts_(opts), seed_(seed) {
  if (opts_.population_size < 1000)
    throw std::invalid_argument("population size N must be at least 1e3");
  if (opts_.population_size < 10000)
    std::cerr << "cafde: warning: population size below 1e4 gives noisy BER estimates\n";
  if (opts_.max_sweeps < 1) throw std::invalid_argument("max sweeps T must be >= 1");
  if (!(opts_.stop_ber > 0.0 && opts_.stop_ber < 0.5))
    throw std::invalid_argument("stop_ber must lie in (0, 1/2)");
  const int dr = coupled() ? proto().dr() : regular().dr;
  if (dr > 32) throw std::invalid_argument("check degree above 32 not supported");
  workers_ = resolve_workers(opts_.workers);

  const int pops = coupled() ? proto().chain_length() * proto().dl() * 2 : 2;
  const auto zero = Eigen::ArrayXd::Zero(opts_.population_size);
  var_pops_.assign(pops, zero);
  chk_pops_.assign(pops, zero);
  var_scratch_.assign(pops, zero);
  chk_scratch_.assign(pops, zero);
  tanh_tbl_.assign(pops, zero);
}

void DensityEvolution::refresh_tanh_tables() {
  const double clip = opts_.llr_clip;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers_)
#endif
  for (std::size_t p = 0; p < var_pops_.size(); ++p)
    tanh_tbl_[p] = (var_pops_[p].min(clip).max(-clip) * 0.5).tanh();
}

void DensityEvolution::step() {
  std::visit(
      [&](const auto& ch) {
        if (coupled())
          sweep_coupled(ch);
        else
          sweep_regular(ch);
      },
      channel_);
  ++iteration_;
}

Eigen::ArrayXd DensityEvolution::estimate_ber() const {
  if (iteration_ < 1) throw std::logic_error("estimate_ber requires at least one sweep");
  return std::visit(
      [&](const auto& ch) { return coupled() ? ber_coupled(ch) : ber_regular(ch); }, channel_);
}

template <class Chan>
void DensityEvolution::sweep_regular(const Chan& ch) {
  const int n = opts_.population_size;
  const auto un = static_cast<std::uint32_t>(n);
  const int dr = regular().dr;
  const int dl = regular().dl;
  const std::uint64_t sweep_key = key_mix(seed_, static_cast<std::uint64_t>(iteration_) + 1);
  const std::uint64_t chk_key = key_mix(sweep_key, kCheckPhase);
  const std::uint64_t var_key = key_mix(sweep_key, kVarPhase);

  refresh_tanh_tables();

  const double* tbl[2] = {tanh_tbl_[0].data(), tanh_tbl_[1].data()};
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers_)
#endif
  for (long flat = 0; flat < 2L * n; ++flat) {
    const int z = static_cast<int>(flat / n);
    const int idx = static_cast<int>(flat % n);
    Rng rng(key_mix(chk_key, z, idx));
    const std::uint32_t bits = draw_parity_bits(dr - 1, z, rng);
    double prod = 1.0;
    for (int s = 0; s < dr - 1; ++s) prod *= tbl[(bits >> s) & 1][rng.below(un)];
    chk_scratch_[z][idx] = atanh2(prod, opts_.tanh_clip);
  }
  chk_pops_.swap(chk_scratch_);

  const double* qtbl[2] = {chk_pops_[0].data(), chk_pops_[1].data()};
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers_)
#endif
  for (long flat = 0; flat < 2L * n; ++flat) {
    const int z = static_cast<int>(flat / n);
    const int idx = static_cast<int>(flat % n);
    Rng rng(key_mix(var_key, z, idx));
    double m = ch.llr(ch.sample_output(z, rng));
    for (int s = 0; s < dl - 1; ++s) m += qtbl[z][rng.below(un)];
    var_scratch_[z][idx] = std::clamp(m, -opts_.llr_clip, opts_.llr_clip);
  }
  var_pops_.swap(var_scratch_);
}

template <class Chan>
void DensityEvolution::sweep_coupled(const Chan& ch) {
  const Protograph& g = proto();
  const int n = opts_.population_size;
  const auto un = static_cast<std::uint32_t>(n);
  const int dl = g.dl();
  const int k = g.k();
  const int npops = g.chain_length() * dl * 2;
  const std::uint64_t sweep_key = key_mix(seed_, static_cast<std::uint64_t>(iteration_) + 1);
  const std::uint64_t chk_key = key_mix(sweep_key, kCheckPhase);
  const std::uint64_t var_key = key_mix(sweep_key, kVarPhase);

  refresh_tanh_tables();

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers_)
#endif
  for (long flat = 0; flat < static_cast<long>(npops) * n; ++flat) {
    const int p = static_cast<int>(flat / n);
    const int idx = static_cast<int>(flat % n);
    const int z = p & 1;
    const int slot = (p >> 1) % dl;
    const int bundle = (p >> 1) / dl;
    const auto& inc = g.check_incidence(g.check_of_slot(bundle, slot));
    const int inputs = k * static_cast<int>(inc.size()) - 1;

    Rng rng(key_mix(chk_key, p, idx));
    const std::uint32_t bits = draw_parity_bits(inputs, z, rng);
    double prod = 1.0;
    int s = 0;
    for (const auto& [jb, jw] : inc) {
      const int copies = (jb == bundle && jw == slot) ? k - 1 : k;
      const int base = (jb * dl + jw) * 2;
      for (int c = 0; c < copies; ++c, ++s)
        prod *= tanh_tbl_[base + ((bits >> s) & 1)].data()[rng.below(un)];
    }
    chk_scratch_[p][idx] = atanh2(prod, opts_.tanh_clip);
  }
  chk_pops_.swap(chk_scratch_);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers_)
#endif
  for (long flat = 0; flat < static_cast<long>(npops) * n; ++flat) {
    const int p = static_cast<int>(flat / n);
    const int idx = static_cast<int>(flat % n);
    const int z = p & 1;
    const int slot = (p >> 1) % dl;
    const int bundle = (p >> 1) / dl;

    Rng rng(key_mix(var_key, p, idx));
    double m = ch.llr(ch.sample_output(z, rng));
    for (int w = 0; w < dl; ++w) {
      if (w == slot) continue;
      m += chk_pops_[(bundle * dl + w) * 2 + z].data()[rng.below(un)];
    }
    var_scratch_[p][idx] = std::clamp(m, -opts_.llr_clip, opts_.llr_clip);
  }
  var_pops_.swap(var_scratch_);
}

namespace {

// error weight in half units: 2 per decided error, 1 per tie at zero
inline int error_half_units(double m, int z) {
  if (m == 0.0) return 1;
  const bool decided_one = m < 0.0;
  return (decided_one != (z == 1)) ? 2 : 0;
}

}  // namespace

template <class Chan>
Eigen::ArrayXd DensityEvolution::ber_regular(const Chan& ch) const {
  const int n = opts_.population_size;
  const auto un = static_cast<std::uint32_t>(n);
  const int dl = regular().dl;
  const std::uint64_t ber_key = key_mix(key_mix(seed_, static_cast<std::uint64_t>(iteration_)), kBerPhase);
  const double* qtbl[2] = {chk_pops_[0].data(), chk_pops_[1].data()};

  long half_units = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(workers_) reduction(+ : half_units)
#endif
  for (long flat = 0; flat < 2L * n; ++flat) {
    const int z = static_cast<int>(flat / n);
    const int idx = static_cast<int>(flat % n);
    Rng rng(key_mix(ber_key, z, idx));
    double m = ch.llr(ch.sample_output(z, rng));
    for (int s = 0; s < dl; ++s) m += qtbl[z][rng.below(un)];
    half_units += error_half_units(m, z);
  }
  Eigen::ArrayXd out(1);
  out[0] = static_cast<double>(half_units) / (4.0 * n);
  return out;
}

template <class Chan>
Eigen::ArrayXd DensityEvolution::ber_coupled(const Chan& ch) const {
  const Protograph& g = proto();
  const int n = opts_.population_size;
  const auto un = static_cast<std::uint32_t>(n);
  const int dl = g.dl();
  const int L = g.chain_length();
  const std::uint64_t ber_key = key_mix(key_mix(seed_, static_cast<std::uint64_t>(iteration_)), kBerPhase);

  const long total = 2L * static_cast<long>(L) * n;
  std::vector<long> half_units(static_cast<std::size_t>(L), 0);
#ifdef _OPENMP
#pragma omp parallel num_threads(workers_)
#endif
  {
    std::vector<long> local(half_units.size(), 0);
#ifdef _OPENMP
#pragma omp for schedule(static)
#endif
    for (long flat = 0; flat < total; ++flat) {
      const int idx = static_cast<int>(flat % n);
      const int z = static_cast<int>((flat / n) & 1);
      const int bundle = static_cast<int>(flat / (2L * n));
      Rng rng(key_mix(ber_key, bundle * 2 + z, idx));
      double m = ch.llr(ch.sample_output(z, rng));
      for (int w = 0; w < dl; ++w) m += chk_pops_[(bundle * dl + w) * 2 + z].data()[rng.below(un)];
      local[bundle] += error_half_units(m, z);
    }
#ifdef _OPENMP
#pragma omp critical
#endif
    for (std::size_t i = 0; i < local.size(); ++i) half_units[i] += local[i];
  }

  Eigen::ArrayXd out(L);
  for (int i = 0; i < L; ++i) out[i] = static_cast<double>(half_units[i]) / (4.0 * n);
  return out;
}

DEResult run_de(const GraphVariant& graph, const ChannelVariant& channel, const DEOptions& opts,
                std::uint64_t seed) {
  DensityEvolution de(graph, channel, opts, seed);
  const int bundles = de.num_bundles();
  DEResult res;
  res.ber_trace.resize(opts.max_sweeps, bundles);

  std::vector<double> mean_hist;
  mean_hist.reserve(opts.max_sweeps);
  int streak = 0;
  double last_max = 1.0;

  for (int l = 1; l <= opts.max_sweeps; ++l) {
    de.step();
    const Eigen::ArrayXd ber = de.estimate_ber();
    res.ber_trace.row(l - 1) = ber.transpose();
    res.sweeps = l;
    last_max = ber.maxCoeff();
    const double mean = ber.mean();
    mean_hist.push_back(mean);

    if (last_max == 0.0 && res.first_zero_sweep < 0) res.first_zero_sweep = l;
    streak = (last_max < opts.stop_ber) ? streak + 1 : 0;
    if (streak >= opts.stop_streak) {
      res.decodable = true;
      break;
    }
    if (opts.stall_window > 0 && l > opts.stall_window && mean > opts.stall_min_ber &&
        mean_hist[l - 1 - opts.stall_window] - mean < opts.stall_min_delta) {
      res.stalled = true;
      break;
    }
  }
  if (!res.decodable && !res.stalled) res.decodable = last_max < opts.stop_ber;
  res.ber_trace.conservativeResize(res.sweeps, bundles);
  return res;
}

}  // namespace cafde
