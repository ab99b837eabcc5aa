#include "cafde/bpsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cafde {

namespace {

constexpr double kLlrClip = 300.0;
constexpr double kTanhClip = 1e-15;

inline double atanh2(double p) {
  p = std::clamp(p, -1.0 + kTanhClip, 1.0 - kTanhClip);
  return std::log((1.0 + p) / (1.0 - p));
}

// Edge-indexed Tanner graph workspace reused across iterations (and frames).
struct BpWorkspace {
  explicit BpWorkspace(const CodeInstance& code) {
    const auto& checks = code.check_neighbors();
    check_offset.reserve(checks.size() + 1);
    check_offset.push_back(0);
    for (const auto& nbrs : checks) {
      for (int v : nbrs) edge_var.push_back(v);
      check_offset.push_back(static_cast<int>(edge_var.size()));
    }
    var_edges.resize(code.block_length());
    for (std::size_t c = 0; c < checks.size(); ++c)
      for (int e = check_offset[c]; e < check_offset[c + 1]; ++e)
        var_edges[edge_var[e]].push_back(e);
    v2c.resize(edge_var.size());
    c2v.resize(edge_var.size());
    scratch.reserve(64);
  }

  std::vector<int> check_offset;            // CSR over checks
  std::vector<int> edge_var;                // edge -> variable
  std::vector<std::vector<int>> var_edges;  // variable -> edge ids
  std::vector<double> v2c, c2v, scratch;
};

template <class Chan>
DecodeOutcome bp_decode_impl(const CodeInstance& code, BpWorkspace& ws, const Eigen::ArrayXd& y,
                             const Chan& ch, int max_iter, const BitVector* truth,
                             std::vector<double>* trace) {
  const int n = code.block_length();
  const int m = code.num_checks();
  if (y.size() != n) throw std::invalid_argument("received word length does not match the code");

  Eigen::ArrayXd channel_llr(n);
  for (int t = 0; t < n; ++t)
    channel_llr[t] = std::clamp(ch.llr(y[t]), -kLlrClip, kLlrClip);

  for (const auto& edges : ws.var_edges)
    for (int e : edges) ws.v2c[e] = channel_llr[ws.edge_var[e]];

  DecodeOutcome out;
  out.estimate = BitVector(n);
  out.posterior_llrs = channel_llr;

  const auto harden = [&](const Eigen::ArrayXd& post) {
    for (int t = 0; t < n; ++t) out.estimate.set(t, post[t] < 0.0);
  };
  const auto record_trace = [&](const Eigen::ArrayXd& post) {
    if (!trace) return;
    int errs = 0;
    for (int t = 0; t < n; ++t) errs += (post[t] < 0.0) != truth->get(t);
    trace->push_back(static_cast<double>(errs) / n);
  };

  harden(channel_llr);
  record_trace(channel_llr);
  out.converged = code.satisfies_checks(out.estimate);

  Eigen::ArrayXd posterior(n);
  for (int iter = 1; !out.converged && iter <= max_iter; ++iter) {
    // check pass: exclusion products via prefix/suffix
    for (int c = 0; c < m; ++c) {
      const int lo = ws.check_offset[c], hi = ws.check_offset[c + 1];
      const int deg = hi - lo;
      ws.scratch.assign(deg, 0.0);
      double prefix = 1.0;
      for (int j = 0; j < deg; ++j) {
        ws.scratch[j] = prefix;  // product of tanh over edges < j
        prefix *= std::tanh(0.5 * std::clamp(ws.v2c[lo + j], -kLlrClip, kLlrClip));
      }
      double suffix = 1.0;
      for (int j = deg - 1; j >= 0; --j) {
        ws.c2v[lo + j] = atanh2(ws.scratch[j] * suffix);
        suffix *= std::tanh(0.5 * std::clamp(ws.v2c[lo + j], -kLlrClip, kLlrClip));
      }
    }

    // variable pass and posterior
    for (int t = 0; t < n; ++t) {
      double total = channel_llr[t];
      for (int e : ws.var_edges[t]) total += ws.c2v[e];
      posterior[t] = total;
      for (int e : ws.var_edges[t]) ws.v2c[e] = std::clamp(total - ws.c2v[e], -kLlrClip, kLlrClip);
    }

    out.iterations_used = iter;
    harden(posterior);
    record_trace(posterior);
    out.posterior_llrs = posterior;
    out.converged = code.satisfies_checks(out.estimate);
  }
  // keep the trace aligned to max_iter entries even after convergence
  if (trace)
    while (static_cast<int>(trace->size()) <= max_iter) trace->push_back(trace->back());
  return out;
}

}  // namespace

DecodeOutcome bp_decode(const CodeInstance& code, const Eigen::ArrayXd& y,
                        const DegradedChannel& ch, int max_iter) {
  BpWorkspace ws(code);
  return bp_decode_impl(code, ws, y, ch, max_iter, nullptr, nullptr);
}

DecodeOutcome bp_decode(const CodeInstance& code, const Eigen::ArrayXd& y, const BiAwgnChannel& ch,
                        int max_iter) {
  BpWorkspace ws(code);
  return bp_decode_impl(code, ws, y, ch, max_iter, nullptr, nullptr);
}

DecodeOutcome bp_decode_traced(const CodeInstance& code, const Eigen::ArrayXd& y,
                               const DegradedChannel& ch, int max_iter, const BitVector& truth,
                               std::vector<double>& trace) {
  BpWorkspace ws(code);
  trace.clear();
  return bp_decode_impl(code, ws, y, ch, max_iter, &truth, &trace);
}

BitVector ml_decode(const CodeInstance& code, const Eigen::ArrayXd& y, const DegradedChannel& ch) {
  const int dim = code.dimension();
  if (dim > 24) throw std::invalid_argument("ml_decode: code dimension above 24, enumeration refused");
  const int n = code.block_length();
  if (y.size() != n) throw std::invalid_argument("received word length does not match the code");

  const std::vector<BitVector> gen = code.generator_rows();
  Eigen::ArrayXd llr(n);
  for (int t = 0; t < n; ++t) llr[t] = ch.llr(y[t]);

  // score(word) = sum_t ln L(y_t | word_t) = const - sum_{t: word_t = 1} llr_t;
  // maximize by minimizing the partial llr sum. Gray-code walk, one generator
  // row toggled per step.
  BitVector word(n);
  double partial = 0.0;
  BitVector best = word;
  double best_partial = partial;

  const std::uint64_t count = std::uint64_t(1) << dim;
  std::uint64_t gray = 0;
  for (std::uint64_t msg = 1; msg < count; ++msg) {
    const std::uint64_t next_gray = msg ^ (msg >> 1);
    const int row = std::countr_zero(gray ^ next_gray);
    gray = next_gray;
    const BitVector& g = gen[row];
    for (int t = 0; t < n; ++t) {
      if (!g.get(t)) continue;
      partial += word.get(t) ? -llr[t] : llr[t];
      word.flip(t);
    }
    if (partial < best_partial || (partial == best_partial && word.lex_less(best))) {
      best = word;
      best_partial = partial;
    }
  }
  return best;
}

WilsonInterval wilson_interval(long long successes, long long trials, double zscore) {
  WilsonInterval ci;
  if (trials <= 0) return ci;
  const double p = static_cast<double>(successes) / trials;
  const double z2 = zscore * zscore;
  const double denom = 1.0 + z2 / trials;
  const double center = (p + z2 / (2.0 * trials)) / denom;
  const double half =
      zscore * std::sqrt(p * (1.0 - p) / trials + z2 / (4.0 * trials * trials)) / denom;
  ci.lo = std::max(0.0, center - half);
  ci.hi = std::min(1.0, center + half);
  return ci;
}

MonteCarloResult monte_carlo(const CodeInstance& code, const DegradedChannel& ch, int frames,
                             int max_iter, std::uint64_t seed, int trace_iterations, int workers) {
  if (frames < 1) throw std::invalid_argument("frames must be >= 1");
  const int n = code.block_length();
  const int trace_len = trace_iterations > 0 ? trace_iterations + 1 : 0;

  std::vector<long long> bit_errs(frames, 0);
  std::vector<int> frame_err(frames, 0), iters(frames, 0);
  std::vector<std::vector<double>> traces(trace_len > 0 ? frames : 0);

#ifdef _OPENMP
  const int nthreads = workers > 0 ? workers : omp_get_max_threads();
#pragma omp parallel num_threads(nthreads)
#endif
  {
    BpWorkspace ws(code);
    Eigen::ArrayXd y(n);
    std::vector<double> trace;
#ifdef _OPENMP
#pragma omp for schedule(dynamic)
#endif
    for (int f = 0; f < frames; ++f) {
      Rng rng(key_mix(seed, static_cast<std::uint64_t>(f)));
      const BitVector z = code.sample_codeword(rng);
      for (int t = 0; t < n; ++t) y[t] = ch.sample_output(z.get(t), rng);
      const int iter_budget = trace_len > 0 ? std::max(max_iter, trace_iterations) : max_iter;
      DecodeOutcome out = bp_decode_impl(code, ws, y, ch, iter_budget,
                                         trace_len > 0 ? &z : nullptr,
                                         trace_len > 0 ? &trace : nullptr);
      long long errs = 0;
      for (int t = 0; t < n; ++t) errs += out.estimate.get(t) != z.get(t);
      bit_errs[f] = errs;
      frame_err[f] = errs > 0;
      iters[f] = out.iterations_used;
      if (trace_len > 0) traces[f].assign(trace.begin(), trace.begin() + trace_len);
    }
  }
  (void)workers;

  MonteCarloResult res;
  res.frames = frames;
  for (int f = 0; f < frames; ++f) {
    res.bit_errors += bit_errs[f];
    res.frame_errors += frame_err[f];
    res.avg_iterations += iters[f];
  }
  res.avg_iterations /= frames;
  const long long total_bits = static_cast<long long>(frames) * n;
  res.ber = static_cast<double>(res.bit_errors) / total_bits;
  res.fer = static_cast<double>(res.frame_errors) / frames;
  res.ber_ci = wilson_interval(res.bit_errors, total_bits);
  res.fer_ci = wilson_interval(res.frame_errors, frames);

  if (trace_len > 0) {
    res.per_iteration_ber.assign(trace_len, 0.0);
    res.per_iteration_se.assign(trace_len, 0.0);
    for (int j = 0; j < trace_len; ++j) {
      double mean = 0.0;
      for (int f = 0; f < frames; ++f) mean += traces[f][j];
      mean /= frames;
      double var = 0.0;
      for (int f = 0; f < frames; ++f) {
        const double d = traces[f][j] - mean;
        var += d * d;
      }
      var = frames > 1 ? var / (frames - 1) : 0.0;
      res.per_iteration_ber[j] = mean;
      res.per_iteration_se[j] = std::sqrt(var / frames);
    }
  }
  return res;
}

}  // namespace cafde
