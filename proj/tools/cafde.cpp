// Command-line front end: channel information rates, DE runs, threshold
// searches, chain-length sweeps, extrapolation fits, scheme comparison and
// finite-length BP simulation, with JSON/CSV records that embed their own
// configuration for bit-identical replay via --config.
#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>

#include "cafde/bpsim.hpp"
#include "cafde/quadrature.hpp"
#include "cafde/channel.hpp"
#include "cafde/codes.hpp"
#include "cafde/de.hpp"
#include "cafde/threshold.hpp"
#include "cafde/version.hpp"

using nlohmann::json;

namespace {

struct CommonOpts {
  std::string out;  // empty = stdout
  std::string format = "json";
  std::string config_path;
};

void add_common(CLI::App* cmd, CommonOpts& c) {
  cmd->add_option("--out", c.out, "output file (default: stdout)");
  cmd->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--config", c.config_path,
                  "replay the embedded config of a previously emitted JSON record");
}

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json j;
  in >> j;
  if (j.contains("config")) return j["config"];
  return j;
}

void emit(const CommonOpts& c, const json& record, const std::string& csv) {
  const std::string payload = (c.format == "csv") ? csv : record.dump(2) + "\n";
  if (c.out.empty()) {
    std::cout << payload;
  } else {
    std::ofstream out(c.out, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file: " + c.out);
    out << payload;
  }
}

json wrap(const json& config, const json& result) {
  return json{{"version", cafde::kVersion}, {"config", config}, {"result", result}};
}

cafde::ChannelKind channel_kind(const std::string& name) {
  if (name == "caf" || name == "degraded") return cafde::ChannelKind::kDegraded;
  if (name == "biawgn") return cafde::ChannelKind::kBiAwgn;
  throw std::runtime_error("unknown channel: " + name + " (expected caf or biawgn)");
}

cafde::GraphVariant make_graph(int dl, int dr, int L) {
  if (L > 0) return cafde::Protograph::coupled(dl, dr, L);
  return cafde::RegularEnsemble(dl, dr);
}

cafde::DEOptions de_options_from(const json& j) {
  cafde::DEOptions o;
  o.population_size = j.at("N").get<int>();
  o.max_sweeps = j.at("T").get<int>();
  o.stop_ber = j.value("stop_ber", 1e-5);
  o.workers = j.value("workers", 0);
  if (j.value("stall", false)) o.stall_window = 100;
  return o;
}

json threshold_json(const cafde::ThresholdResult& r) {
  json verdicts = json::array();
  for (const auto& v : r.verdicts)
    verdicts.push_back(json{{"sigma", v.sigma},
                            {"decodable", v.decodable},
                            {"sweeps", v.sweeps},
                            {"final_max_ber", v.final_max_ber},
                            {"N", v.population_size}});
  return json{{"graph", r.graph},
              {"N", r.population_size},
              {"T", r.max_sweeps},
              {"stop_ber", r.stop_ber},
              {"seed", r.seed},
              {"sigma_bp", r.sigma_bp},
              {"sigma_decodable", r.sigma_decodable},
              {"sigma_undecodable", r.sigma_undecodable},
              {"resolution", r.resolution},
              {"consistent", r.consistent},
              {"verdicts", verdicts}};
}

// ---------------------------------------------------------------- sir
int cmd_sir(const json& cfg, const CommonOpts& common) {
  const std::string scheme_name = cfg.at("scheme").get<std::string>();
  const cafde::Scheme scheme =
      scheme_name == "caf" ? cafde::Scheme::kCaf : cafde::Scheme::kSd;
  if (scheme_name != "caf" && scheme_name != "sd")
    throw std::runtime_error("scheme must be caf or sd");

  json result;
  std::ostringstream csv;
  csv << "scheme,rate,sigma\n";
  if (cfg.contains("rate")) {
    const double rate = cfg.at("rate").get<double>();
    const double sigma = cafde::sir_threshold(scheme, rate);
    result = {{"scheme", scheme_name}, {"rate", rate}, {"sigma", sigma}};
    csv << scheme_name << ',' << rate << ',' << sigma << '\n';
  } else {
    const double sigma = cfg.at("sigma").get<double>();
    cafde::DegradedChannel ch(sigma);
    const double rate =
        scheme == cafde::Scheme::kCaf ? cafde::sir_caf(ch) : 0.5 * cafde::mi_sd(ch);
    result = {{"scheme", scheme_name}, {"rate", rate}, {"sigma", sigma}};
    csv << scheme_name << ',' << rate << ',' << sigma << '\n';
  }
  emit(common, wrap(cfg, result), csv.str());
  return 0;
}

// ---------------------------------------------------------------- de-run
int cmd_de_run(const json& cfg, const CommonOpts& common) {
  const int dl = cfg.at("dl").get<int>();
  const int dr = cfg.at("dr").get<int>();
  const int L = cfg.value("L", 0);
  const double sigma = cfg.at("sigma").get<double>();
  const std::uint64_t seed = cfg.value("seed", 1ULL);
  const cafde::DEOptions opts = de_options_from(cfg);
  const cafde::ChannelKind kind = channel_kind(cfg.value("channel", "caf"));

  const cafde::GraphVariant graph = make_graph(dl, dr, L);
  const cafde::DEResult r = cafde::run_de(graph, cafde::make_channel(kind, sigma), opts, seed);

  json trace = json::array();
  std::ostringstream csv;
  csv << "iteration,bundle_index,ber\n";
  for (int l = 0; l < r.sweeps; ++l) {
    if (L > 0) {
      for (int b = 0; b < r.ber_trace.cols(); ++b) {
        csv << (l + 1) << ',' << (b + 1) << ',' << r.ber_trace(l, b) << '\n';
      }
    } else {
      csv << (l + 1) << ",all," << r.ber_trace(l, 0) << '\n';
    }
    trace.push_back(std::vector<double>(r.ber_trace.row(l).begin(), r.ber_trace.row(l).end()));
  }
  const json result = {{"decodable", r.decodable},
                       {"stalled", r.stalled},
                       {"sweeps", r.sweeps},
                       {"first_zero_sweep", r.first_zero_sweep},
                       {"ber_trace", trace}};
  emit(common, wrap(cfg, result), csv.str());
  return 0;
}

// ---------------------------------------------------------------- threshold
int cmd_threshold(const json& cfg, const CommonOpts& common) {
  const int dl = cfg.at("dl").get<int>();
  const int dr = cfg.at("dr").get<int>();
  const int L = cfg.value("L", 0);
  const double resolution = cfg.value("resolution", 2e-3);
  const std::uint64_t seed = cfg.value("seed", 1ULL);
  const cafde::DEOptions opts = de_options_from(cfg);
  const cafde::ChannelKind kind = channel_kind(cfg.value("channel", "caf"));

  const cafde::ThresholdResult r =
      cafde::find_threshold(make_graph(dl, dr, L), kind, opts, seed, resolution);

  std::ostringstream csv;
  csv << "sigma,decodable,sweeps,final_max_ber,N\n";
  for (const auto& v : r.verdicts)
    csv << v.sigma << ',' << v.decodable << ',' << v.sweeps << ',' << v.final_max_ber << ','
        << v.population_size << '\n';
  emit(common, wrap(cfg, threshold_json(r)), csv.str());
  return 0;
}

// ---------------------------------------------------------------- sweep-l
int cmd_sweep_l(const json& cfg, const CommonOpts& common) {
  const int dl = cfg.at("dl").get<int>();
  const int dr = cfg.at("dr").get<int>();
  const std::vector<int> lengths = cfg.at("Ls").get<std::vector<int>>();
  const double resolution = cfg.value("resolution", 2e-3);
  const std::uint64_t seed = cfg.value("seed", 1ULL);
  const cafde::DEOptions opts = de_options_from(cfg);

  const auto points = cafde::sweep_chain_lengths(dl, dr, lengths, opts, seed, resolution);

  json result = json::array();
  std::ostringstream csv;
  csv << "L,design_rate,sir_sigma,sigma_bp,sigma_decodable,sigma_undecodable\n";
  for (const auto& p : points) {
    json entry = {{"L", p.chain_length},
                  {"design_rate", p.design_rate},
                  {"sir_sigma", p.sir_sigma},
                  {"ok", p.ok}};
    if (p.ok) {
      entry["threshold"] = threshold_json(p.threshold);
      csv << p.chain_length << ',' << p.design_rate << ',' << p.sir_sigma << ','
          << p.threshold.sigma_bp << ',' << p.threshold.sigma_decodable << ','
          << p.threshold.sigma_undecodable << '\n';
    } else {
      entry["error"] = p.error;
    }
    result.push_back(entry);
  }
  emit(common, wrap(cfg, result), csv.str());
  return 0;
}

// ---------------------------------------------------------------- extrapolate
int cmd_extrapolate(const json& cfg, const CommonOpts& common) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& p : cfg.at("points")) pts.emplace_back(p.at(0).get<double>(), p.at(1).get<double>());
  const double max_residual = cfg.value("max_residual", 1e-2);

  const cafde::ExtrapolationFit fit = cafde::extrapolate(pts, max_residual);
  const json result = {{"sigma_inf", fit.sigma_inf}, {"a", fit.a},
                       {"b", fit.b},                 {"c", fit.c},
                       {"rms_residual", fit.rms_residual}};
  std::ostringstream csv;
  csv << "sigma_inf,a,b,c,rms_residual\n"
      << fit.sigma_inf << ',' << fit.a << ',' << fit.b << ',' << fit.c << ','
      << fit.rms_residual << '\n';
  emit(common, wrap(cfg, result), csv.str());
  return 0;
}

// ---------------------------------------------------------------- compare
int cmd_compare(const json& cfg, const CommonOpts& common) {
  const std::vector<double> rates = cfg.at("rates").get<std::vector<double>>();
  std::vector<cafde::MeasuredThresholds> measured;
  if (cfg.contains("thresholds")) {
    for (const auto& t : cfg.at("thresholds"))
      measured.push_back(
          {t.at("rate").get<double>(), t.value("uncoupled", 0.0), t.value("coupled", 0.0)});
  }
  const auto rows = cafde::comparison_report(rates, measured);

  json result = json::array();
  std::ostringstream csv;
  csv << "rate,caf_sir_sigma,sd_sir_sigma,uncoupled_threshold,coupled_threshold,caf_advantage,"
         "near_parity\n";
  for (const auto& r : rows) {
    result.push_back(json{{"rate", r.rate},
                          {"caf_sir_sigma", r.caf_sir_sigma},
                          {"sd_sir_sigma", r.sd_sir_sigma},
                          {"uncoupled_threshold", r.uncoupled_threshold},
                          {"coupled_threshold", r.coupled_threshold},
                          {"caf_advantage", r.caf_advantage},
                          {"near_parity", r.near_parity}});
    csv << r.rate << ',' << r.caf_sir_sigma << ',' << r.sd_sir_sigma << ','
        << r.uncoupled_threshold << ',' << r.coupled_threshold << ',' << r.caf_advantage << ','
        << r.near_parity << '\n';
  }
  std::cerr << cafde::format_comparison(rows);
  emit(common, wrap(cfg, result), csv.str());
  return 0;
}

// ---------------------------------------------------------------- bp-sim
int cmd_bp_sim(const json& cfg, const CommonOpts& common) {
  const int dl = cfg.at("dl").get<int>();
  const int dr = cfg.at("dr").get<int>();
  const int n = cfg.at("n").get<int>();
  const double sigma = cfg.at("sigma").get<double>();
  const int frames = cfg.value("frames", 200);
  const int max_iter = cfg.value("max_iter", 100);
  const std::uint64_t seed = cfg.value("seed", 1ULL);
  const int workers = cfg.value("workers", 0);
  const int trace_iters = cfg.value("trace_iters", 0);

  const cafde::CodeInstance code =
      cafde::sample_code(cafde::RegularEnsemble(dl, dr), n, cafde::key_mix(seed, 0xc0de));
  const cafde::DegradedChannel ch(sigma);
  const cafde::MonteCarloResult r =
      cafde::monte_carlo(code, ch, frames, max_iter, seed, trace_iters, workers);

  json result = {{"sigma", sigma},
                 {"n", n},
                 {"frames", r.frames},
                 {"ber", r.ber},
                 {"ber_lo", r.ber_ci.lo},
                 {"ber_hi", r.ber_ci.hi},
                 {"fer", r.fer},
                 {"fer_lo", r.fer_ci.lo},
                 {"fer_hi", r.fer_ci.hi},
                 {"avg_iters", r.avg_iterations},
                 {"rank_deficiency", code.origin().rank_deficiency}};
  if (trace_iters > 0) {
    result["per_iteration_ber"] = r.per_iteration_ber;
    result["per_iteration_se"] = r.per_iteration_se;
  }
  std::ostringstream csv;
  csv << "sigma,n,frames,ber,ber_lo,ber_hi,fer,fer_lo,fer_hi,avg_iters\n"
      << sigma << ',' << n << ',' << r.frames << ',' << r.ber << ',' << r.ber_ci.lo << ','
      << r.ber_ci.hi << ',' << r.fer << ',' << r.fer_ci.lo << ',' << r.fer_ci.hi << ','
      << r.avg_iterations << '\n';
  emit(common, wrap(cfg, result), csv.str());
  return 0;
}

// ---------------------------------------------------------------- selftest
int cmd_selftest(const json&, const CommonOpts&) {
  int failures = 0;
  const auto check = [&](bool ok, const char* name) {
    std::cout << (ok ? "[PASS] " : "[FAIL] ") << name << "\n";
    failures += !ok;
  };

  {
    bool ok = true;
    for (double sigma : {0.5, 0.8, 1.2}) {
      cafde::DegradedChannel ch(sigma);
      for (double y = -6.0; y <= 6.0; y += 0.25) {
        const double direct = std::log(ch.likelihood(y, 0) / ch.likelihood(y, 1));
        if (std::fabs(direct - ch.llr(y)) > 1e-9 * std::max(1.0, std::fabs(direct))) ok = false;
      }
    }
    check(ok, "llr matches likelihood ratio to 1e-9");
  }
  {
    bool ok = true;
    for (double sigma : {0.4, 0.805, 1.5}) {
      cafde::DegradedChannel ch(sigma);
      for (int z : {0, 1}) {
        const double mass = cafde::integrate([&](double y) { return ch.likelihood(y, z); },
                                             -ch.support_radius(), ch.support_radius(), 1e-10)
                                .value;
        if (std::fabs(mass - 1.0) > 1e-8) ok = false;
      }
    }
    check(ok, "likelihoods are normalized to 1e-8");
  }
  {
    // parity-constrained bit draws hit every admissible pattern uniformly
    cafde::Rng rng(cafde::key_mix(7, 0x5e1f));
    const int count = 5, draws = 100000;
    std::vector<int> hist(1 << count, 0);
    for (int i = 0; i < draws; ++i) hist[cafde::draw_parity_bits(count, 0, rng)]++;
    double chi2 = 0.0;
    bool admissible_only = true;
    const double expect = draws / 16.0;
    for (int pat = 0; pat < (1 << count); ++pat) {
      if (std::popcount(static_cast<unsigned>(pat)) % 2 == 0) {
        const double d = hist[pat] - expect;
        chi2 += d * d / expect;
      } else if (hist[pat] != 0) {
        admissible_only = false;
      }
    }
    check(admissible_only && chi2 < 44.263, "parity-conditioned draws uniform (chi2, 15 dof)");
  }
  {
    cafde::DEOptions opts;
    opts.population_size = 2000;
    opts.max_sweeps = 10;
    opts.workers = 1;
    const cafde::GraphVariant g = cafde::RegularEnsemble(3, 6);
    const cafde::ChannelVariant ch = cafde::DegradedChannel(0.7);
    const cafde::DEResult a = cafde::run_de(g, ch, opts, 99);
    opts.workers = 2;
    const cafde::DEResult b = cafde::run_de(g, ch, opts, 99);
    check(a.ber_trace == b.ber_trace, "DE trace independent of worker count");
  }
  {
    const cafde::CodeInstance code = cafde::sample_code(cafde::RegularEnsemble(3, 6), 512, 5);
    const cafde::DegradedChannel ch(0.9);
    cafde::Rng rng(123);
    bool ok = true;
    for (int f = 0; f < 5; ++f) {
      const cafde::BitVector z = code.sample_codeword(rng);
      Eigen::ArrayXd y(code.block_length());
      for (int t = 0; t < code.block_length(); ++t) y[t] = ch.sample_output(z.get(t), rng);
      const cafde::DecodeOutcome out = cafde::bp_decode(code, y, ch, 30);
      if (out.converged && !code.satisfies_checks(out.estimate)) ok = false;
    }
    check(ok, "bp_decode never reports converged with an unsatisfied check");
  }

  std::cout << (failures == 0 ? "selftest passed\n" : "selftest FAILED\n");
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{std::string(cafde::kVersion) +
               " - density evolution toolkit for LDPC coding on the two-way relay channel"};
  app.require_subcommand(1);

  // sir
  CommonOpts sir_common;
  double sir_rate = -1.0, sir_sigma = -1.0;
  std::string sir_scheme = "caf";
  auto* sir = app.add_subcommand("sir", "information-rate thresholds of the CAF/SD schemes");
  sir->add_option("--scheme", sir_scheme, "caf or sd")->check(CLI::IsMember({"caf", "sd"}));
  sir->add_option("--rate", sir_rate, "code rate; solves for sigma");
  sir->add_option("--sigma", sir_sigma, "noise level; evaluates the rate");
  add_common(sir, sir_common);

  // de-run
  CommonOpts de_common;
  int de_dl = 3, de_dr = 6, de_L = 0, de_N = 100000, de_T = 2000, de_workers = 0;
  double de_sigma = -1.0, de_stop = 1e-5;
  std::uint64_t de_seed = 1;
  bool de_fast = false;
  std::string de_channel = "caf";
  auto* derun = app.add_subcommand("de-run", "single density-evolution run with BER trace");
  derun->add_option("--dl", de_dl, "variable degree");
  derun->add_option("--dr", de_dr, "check degree");
  derun->add_option("--L", de_L, "chain length (0 = uncoupled)");
  derun->add_option("--sigma", de_sigma, "noise level");
  derun->add_option("--N", de_N, "population size");
  derun->add_option("--T", de_T, "max sweeps");
  derun->add_option("--stop-ber", de_stop, "decodability BER target");
  derun->add_option("--seed", de_seed, "rng seed");
  derun->add_option("--workers", de_workers, "worker threads (0 = all cores)");
  derun->add_option("--channel", de_channel, "caf or biawgn");
  derun->add_flag("--fast", de_fast, "preset N=1e4, T=500");
  add_common(derun, de_common);

  // threshold
  CommonOpts thr_common;
  int thr_dl = 3, thr_dr = 6, thr_L = 0, thr_N = 100000, thr_T = 2000, thr_workers = 0;
  double thr_res = 2e-3, thr_stop = 1e-5;
  std::uint64_t thr_seed = 1;
  bool thr_fast = false, thr_nostall = false;
  std::string thr_channel = "caf";
  auto* thr = app.add_subcommand("threshold", "BP threshold search over sigma");
  thr->add_option("--dl", thr_dl, "variable degree");
  thr->add_option("--dr", thr_dr, "check degree");
  thr->add_option("--L", thr_L, "chain length (0 = uncoupled)");
  thr->add_option("--N", thr_N, "population size");
  thr->add_option("--T", thr_T, "max sweeps");
  thr->add_option("--stop-ber", thr_stop, "decodability BER target");
  thr->add_option("--resolution", thr_res, "bracket width target (>= 1e-4)");
  thr->add_option("--seed", thr_seed, "rng seed");
  thr->add_option("--workers", thr_workers, "worker threads (0 = all cores)");
  thr->add_option("--channel", thr_channel, "caf or biawgn");
  thr->add_flag("--fast", thr_fast, "preset N=1e4, T=500");
  thr->add_flag("--no-stall", thr_nostall, "disable the early-undecodable stall rule");
  add_common(thr, thr_common);

  // sweep-l
  CommonOpts swp_common;
  int swp_dl = 3, swp_dr = 6, swp_N = 10000, swp_T = 1000, swp_workers = 0;
  double swp_res = 2e-3;
  std::uint64_t swp_seed = 1;
  std::vector<int> swp_Ls = {5, 10, 15, 20, 25, 30};
  auto* swp = app.add_subcommand("sweep-l", "thresholds of (dl,dr,L) chains for several L");
  swp->add_option("--dl", swp_dl, "variable degree");
  swp->add_option("--dr", swp_dr, "check degree");
  swp->add_option("--Ls", swp_Ls, "chain lengths")->delimiter(',');
  swp->add_option("--N", swp_N, "population size");
  swp->add_option("--T", swp_T, "max sweeps");
  swp->add_option("--resolution", swp_res, "bracket width target");
  swp->add_option("--seed", swp_seed, "rng seed");
  swp->add_option("--workers", swp_workers, "worker threads (0 = all cores)");
  add_common(swp, swp_common);

  // extrapolate
  CommonOpts ext_common;
  std::string ext_points, ext_sweep_file;
  double ext_max_resid = 1e-2;
  auto* ext = app.add_subcommand("extrapolate", "large-L fit sigma_inf + a*exp(-b*L^c)");
  ext->add_option("--points", ext_points, "comma list L:sigma,L:sigma,...");
  ext->add_option("--sweep", ext_sweep_file, "JSON record emitted by sweep-l");
  ext->add_option("--max-residual", ext_max_resid, "refuse fits with rms residual above this");
  add_common(ext, ext_common);

  // compare
  CommonOpts cmp_common;
  std::vector<double> cmp_rates = {1.0 / 3.0, 0.5, 2.0 / 3.0};
  std::string cmp_thresholds;
  auto* cmp = app.add_subcommand("compare", "CAF vs SD information rates per code rate");
  cmp->add_option("--rates", cmp_rates, "code rates")->delimiter(',');
  cmp->add_option("--thresholds", cmp_thresholds,
                  "JSON file with measured rows [{rate, uncoupled, coupled}, ...]");
  add_common(cmp, cmp_common);

  // bp-sim
  CommonOpts bps_common;
  int bps_dl = 3, bps_dr = 6, bps_n = 4096, bps_frames = 200, bps_iter = 100, bps_workers = 0,
      bps_trace = 0;
  double bps_sigma = -1.0;
  std::uint64_t bps_seed = 1;
  auto* bps = app.add_subcommand("bp-sim", "finite-length BP Monte-Carlo over the degraded channel");
  bps->add_option("--dl", bps_dl, "variable degree");
  bps->add_option("--dr", bps_dr, "check degree");
  bps->add_option("--n", bps_n, "block length");
  bps->add_option("--sigma", bps_sigma, "noise level");
  bps->add_option("--frames", bps_frames, "number of frames");
  bps->add_option("--max-iter", bps_iter, "BP iteration cap");
  bps->add_option("--seed", bps_seed, "rng seed");
  bps->add_option("--workers", bps_workers, "worker threads (0 = all cores)");
  bps->add_option("--trace-iters", bps_trace, "record mean BER per iteration up to this count");
  add_common(bps, bps_common);

  // selftest
  CommonOpts st_common;
  auto* st = app.add_subcommand("selftest", "fast invariant suite");
  add_common(st, st_common);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sir->parsed()) {
      json cfg;
      if (!sir_common.config_path.empty()) {
        cfg = load_config(sir_common.config_path);
      } else {
        cfg = {{"subcommand", "sir"}, {"scheme", sir_scheme}};
        if (sir_rate > 0.0) cfg["rate"] = sir_rate;
        else if (sir_sigma > 0.0) cfg["sigma"] = sir_sigma;
        else throw std::runtime_error("sir: provide --rate or --sigma");
      }
      return cmd_sir(cfg, sir_common);
    }
    if (derun->parsed()) {
      json cfg;
      if (!de_common.config_path.empty()) {
        cfg = load_config(de_common.config_path);
      } else {
        if (de_sigma <= 0.0) throw std::runtime_error("de-run: provide --sigma > 0");
        if (de_fast) {
          de_N = 10000;
          de_T = 500;
        }
        cfg = {{"subcommand", "de-run"}, {"dl", de_dl},   {"dr", de_dr},
               {"L", de_L},              {"sigma", de_sigma}, {"N", de_N},
               {"T", de_T},              {"stop_ber", de_stop}, {"seed", de_seed},
               {"workers", de_workers},  {"channel", de_channel}};
      }
      return cmd_de_run(cfg, de_common);
    }
    if (thr->parsed()) {
      json cfg;
      if (!thr_common.config_path.empty()) {
        cfg = load_config(thr_common.config_path);
      } else {
        if (thr_fast) {
          thr_N = 10000;
          thr_T = 500;
        }
        cfg = {{"subcommand", "threshold"},
               {"dl", thr_dl},
               {"dr", thr_dr},
               {"L", thr_L},
               {"N", thr_N},
               {"T", thr_T},
               {"stop_ber", thr_stop},
               {"resolution", thr_res},
               {"seed", thr_seed},
               {"workers", thr_workers},
               {"channel", thr_channel},
               {"stall", !thr_nostall}};
      }
      return cmd_threshold(cfg, thr_common);
    }
    if (swp->parsed()) {
      json cfg;
      if (!swp_common.config_path.empty()) {
        cfg = load_config(swp_common.config_path);
      } else {
        cfg = {{"subcommand", "sweep-l"}, {"dl", swp_dl},   {"dr", swp_dr},
               {"Ls", swp_Ls},            {"N", swp_N},     {"T", swp_T},
               {"resolution", swp_res},   {"seed", swp_seed}, {"workers", swp_workers},
               {"stall", true}};
      }
      return cmd_sweep_l(cfg, swp_common);
    }
    if (ext->parsed()) {
      json cfg;
      if (!ext_common.config_path.empty()) {
        cfg = load_config(ext_common.config_path);
      } else {
        json pts = json::array();
        if (!ext_sweep_file.empty()) {
          std::ifstream in(ext_sweep_file);
          if (!in) throw std::runtime_error("cannot open sweep file: " + ext_sweep_file);
          json sweep;
          in >> sweep;
          for (const auto& entry : sweep.at("result"))
            if (entry.value("ok", false))
              pts.push_back({entry.at("L").get<double>(),
                             entry.at("threshold").at("sigma_bp").get<double>()});
        } else if (!ext_points.empty()) {
          std::stringstream ss(ext_points);
          std::string tok;
          while (std::getline(ss, tok, ',')) {
            const auto colon = tok.find(':');
            if (colon == std::string::npos)
              throw std::runtime_error("bad --points entry (want L:sigma): " + tok);
            pts.push_back({std::stod(tok.substr(0, colon)), std::stod(tok.substr(colon + 1))});
          }
        } else {
          throw std::runtime_error("extrapolate: provide --points or --sweep");
        }
        cfg = {{"subcommand", "extrapolate"}, {"points", pts}, {"max_residual", ext_max_resid}};
      }
      return cmd_extrapolate(cfg, ext_common);
    }
    if (cmp->parsed()) {
      json cfg;
      if (!cmp_common.config_path.empty()) {
        cfg = load_config(cmp_common.config_path);
      } else {
        cfg = {{"subcommand", "compare"}, {"rates", cmp_rates}};
        if (!cmp_thresholds.empty()) {
          std::ifstream in(cmp_thresholds);
          if (!in) throw std::runtime_error("cannot open thresholds file: " + cmp_thresholds);
          json t;
          in >> t;
          cfg["thresholds"] = t;
        }
      }
      return cmd_compare(cfg, cmp_common);
    }
    if (bps->parsed()) {
      json cfg;
      if (!bps_common.config_path.empty()) {
        cfg = load_config(bps_common.config_path);
      } else {
        if (bps_sigma <= 0.0) throw std::runtime_error("bp-sim: provide --sigma > 0");
        cfg = {{"subcommand", "bp-sim"}, {"dl", bps_dl},       {"dr", bps_dr},
               {"n", bps_n},             {"sigma", bps_sigma}, {"frames", bps_frames},
               {"max_iter", bps_iter},   {"seed", bps_seed},   {"workers", bps_workers},
               {"trace_iters", bps_trace}};
      }
      return cmd_bp_sim(cfg, bps_common);
    }
    if (st->parsed()) return cmd_selftest({}, st_common);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
