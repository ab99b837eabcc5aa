// BP-threshold search over sigma, chain-length sweeps, the large-L
// extrapolation fit, and the CAF-vs-SD comparison table.
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <vector>

#include "cafde/de.hpp"

namespace cafde {

enum class ChannelKind { kDegraded, kBiAwgn };

ChannelVariant make_channel(ChannelKind kind, double sigma);

struct ProbeVerdict {
  double sigma = 0.0;
  bool decodable = false;
  int sweeps = 0;
  double final_max_ber = 0.0;
  int population_size = 0;
};

struct ThresholdResult {
  std::string graph;
  int population_size = 0;
  int max_sweeps = 0;
  double stop_ber = 0.0;
  std::uint64_t seed = 0;
  double sigma_decodable = 0.0;    // largest sigma declared decodable
  double sigma_undecodable = 0.0;  // smallest sigma declared undecodable
  double sigma_bp = 0.0;           // bracket midpoint
  double resolution = 0.0;         // final bracket width
  bool consistent = true;          // verdicts monotone after any re-probe
  std::vector<ProbeVerdict> verdicts;
};

// Bisection on sigma with run_de as the (Monte-Carlo) decodability oracle.
// The bracket comes from a geometric scan sigma = 0.3 * 1.1^k (downward for
// k < 0); each probe derives its rng stream from (seed, sigma). A decodable
// verdict above an undecodable one triggers one re-probe of the pair at
// doubled N before the bracket is accepted.
ThresholdResult find_threshold(const GraphVariant& graph, ChannelKind kind, const DEOptions& opts,
                               std::uint64_t seed, double resolution);

struct SweepPoint {
  int chain_length = 0;
  double design_rate = 0.0;
  double sir_sigma = 0.0;  // SIR threshold at this design rate (degraded channel)
  bool ok = false;
  std::string error;
  ThresholdResult threshold;
};

// Thresholds of (dl, dr, L) chains for each requested L; failures are recorded
// per point and do not abort the sweep.
std::vector<SweepPoint> sweep_chain_lengths(int dl, int dr, const std::vector<int>& lengths,
                                            const DEOptions& opts, std::uint64_t seed,
                                            double resolution);

struct ExtrapolationFit {
  double sigma_inf = 0.0;  // BP threshold in the large-L limit
  double a = 0.0, b = 0.0, c = 0.0;
  double rms_residual = 0.0;
  bool converged = false;
  std::vector<std::pair<double, double>> points;  // (L, sigma_bp)
};

// Nonlinear least squares of sigma_bp(L) = sigma_inf + a*exp(-b*L^c) with a
// multi-start grid over (b, c). Throws if no start converges or if the best
// rms residual exceeds max_residual (a fit looser than the threshold-search
// resolution is meaningless).
ExtrapolationFit extrapolate(const std::vector<std::pair<double, double>>& points,
                             double max_residual);

struct ComparisonRow {
  double rate = 0.0;
  double caf_sir_sigma = 0.0;
  double sd_sir_sigma = 0.0;
  double uncoupled_threshold = 0.0;  // NaN when not supplied
  double coupled_threshold = 0.0;    // NaN when not supplied
  bool caf_advantage = false;        // CAF tolerates more noise at this rate
  bool near_parity = false;          // SIR sigmas within 0.015
};

struct MeasuredThresholds {
  double rate = 0.0;
  double uncoupled = 0.0;
  double coupled = 0.0;
};

std::vector<ComparisonRow> comparison_report(const std::vector<double>& rates,
                                             const std::vector<MeasuredThresholds>& measured = {});

std::string format_comparison(const std::vector<ComparisonRow>& rows);

}  // namespace cafde
