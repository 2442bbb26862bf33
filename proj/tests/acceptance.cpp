// Acceptance suite. Prints one "criterion N: PASS|FAIL" line per criterion.
//
// Exit status is zero when the set of failing criteria equals the set passed
// with --expect-fail (default: none), so a known, analysed failure does not
// hide a new one and an unexpected pass is reported too.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "armagf/applications.hpp"
#include "armagf/design.hpp"
#include "armagf/dynamics.hpp"
#include "armagf/experiments.hpp"
#include "armagf/temporal.hpp"
#include "support.hpp"

using namespace armagf;
using namespace armagf::testing;

namespace {

const LaplacianVariant kShifted{LaplacianKind::shifted_normalized, std::nullopt};
const SpectralBounds kBand{-1.0, 1.0};

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double v) { return format_number(v); }

RunOptions rounds(long n) {
  RunOptions o;
  o.rounds = n;
  return o;
}

double grid_rms(const Response& h, const Response& target) {
  const auto grid = uniform_grid(-1.0, 1.0, kDefaultGridSize);
  return std::sqrt(squared_response_error(h, target, grid) / static_cast<double>(grid.size()));
}

// ---------------------------------------------------------------------------

Outcome criterion1() {
  const Graph g = geometric(50, 11);
  const Operator L = build_laplacian(g, kShifted);
  const auto sd = spectral_decompose(L);
  const Complex psi(-0.7, 0.0), phi(1.0, 0.0);
  const Signal x = random_signal(50, 12);
  const Signal z_inf = spectral_apply(sd, [&](double l) { return response_static(arma1(psi, phi), l); }, x);
  const auto trace = arma1_run(psi, phi, 0.0, constant_operator(L), constant_signal(x), rounds(120));

  std::vector<double> t_fit, log_e;
  for (std::size_t t = 0; t < trace.size(); ++t) {
    const double e = rel(trace.z[t], z_inf);
    if (e < 1e-4 && e > 1e-11) {
      t_fit.push_back(static_cast<double>(t + 1));
      log_e.push_back(std::log(e));
    }
  }
  const double n = static_cast<double>(t_fit.size());
  double st = 0, se = 0, stt = 0, ste = 0;
  for (std::size_t i = 0; i < t_fit.size(); ++i) {
    st += t_fit[i];
    se += log_e[i];
    stt += t_fit[i] * t_fit[i];
    ste += t_fit[i] * log_e[i];
  }
  const double slope = (n * ste - st * se) / (n * stt - st * st);
  const double expected = std::log(std::abs(psi) * sd.eigenvalues.cwiseAbs().maxCoeff());
  const double final_error = rel(trace.z.back(), z_inf);
  const double slope_gap = std::abs(slope - expected) / std::abs(expected);
  return {final_error < 1e-8 && t_fit.size() >= 10 && slope_gap < 0.05,
          "steady error " + fmt(final_error) + ", slope " + fmt(slope) + " vs " + fmt(expected)};
}

Outcome criterion2() {
  // Step designs whose periodic realization is stable over the whole band.
  const Graph g = geometric(30, 21);
  const Operator L = build_laplacian(g, kShifted);
  const Signal x = random_signal(30, 22);
  double closed = 0.0, sim = 0.0;
  bool stable = true;
  for (int K : {2, 5}) {
    const DesignReport rep = design_arma(lowpass_step(-0.5), K, kBand);
    const auto par = std::get<ArmaParallelCoefficients>(rep.coefficients);
    const auto per = periodic_from_rational(rep.rational);
    stable = stable && par.is_stable(1.0) && check_stability(per, kBand).band_factor < 1.0;
    for (double l : uniform_grid(-1.0, 1.0, 500)) {
      closed = std::max(closed, std::abs(response_static(par, l) - response_static(per, l)));
    }
    const long T = 1000L * K;
    const auto a = parallel_arma_run(par, constant_operator(L), constant_signal(x), rounds(T));
    const auto b = periodic_arma_run(per, constant_operator(L), constant_signal(x), rounds(T));
    sim = std::max(sim, rel(a.z.back(), b.last_valid()));
  }
  return {closed < 1e-6 && sim < 1e-6 && stable,
          "K = 2 and 5: closed-form gap " + fmt(closed) + ", simulated gap " + fmt(sim) +
              (stable ? "" : ", unstable realization")};
}

Outcome criterion3() {
  const auto pub = published_k3();
  // Rational response rebuilt from the printed residues and poles.
  const Polynomial monic = poly_from_roots(pub.poles);
  Polynomial num{Complex(0.0)};
  for (std::size_t k = 0; k < pub.poles.size(); ++k) {
    std::vector<Complex> others;
    for (std::size_t j = 0; j < pub.poles.size(); ++j)
      if (j != k) others.push_back(pub.poles[j]);
    num = poly_add(num, poly_scale(poly_from_roots(others), pub.residues[k]));
  }
  num.resize(monic.size(), Complex(0.0));
  RationalResponse rr{poly_scale(num, 1.0 / monic[0]), poly_scale(monic, 1.0 / monic[0])};
  rr.a[0] = 1.0;

  const ResiduePoleForm rp = residue_pole_from_parallel(parallel_from_residue_pole(to_residue_pole(rr)));
  bool digits = rp.pairs.size() == 3;
  for (const ResiduePole& pair : rp.pairs) {
    bool found = false;
    for (std::size_t k = 0; k < 3; ++k) {
      const auto close = [](Complex a, Complex b) {
        return std::abs(a.real() - b.real()) < 5e-4 && std::abs(a.imag() - b.imag()) < 5e-4;
      };
      found = found || (close(pair.p, pub.poles[k]) && close(pair.r, pub.residues[k]));
    }
    digits = digits && found;
  }
  // The printed set passes mu > 0.5 rather than mu < -0.5, so it is scored
  // against the step in the orientation it realizes. The FIR fit error is the
  // same for either orientation.
  const Response target = lowpass_step(-0.5);
  const Response mirrored = [](double mu) { return Complex(mu > 0.5 ? 1.0 : 0.0); };
  const double arma = grid_rms([&](double l) { return rp(l); }, mirrored);
  const double as_stated = grid_rms([&](double l) { return rp(l); }, target);
  const double fir = fir_design_ls(target, 3, kBand).rms_error;
  return {digits && arma <= fir, std::string("round trip ") + (digits ? "exact to 3 decimals" : "mismatch") +
                                     ", published RMS " + fmt(arma) + " (" + fmt(as_stated) +
                                     " against the unmirrored step) vs FIR_3 RMS " + fmt(fir)};
}

Outcome criterion4() {
  const ExperimentResult r = run_experiment(ExperimentConfig::defaults("fig2_denoise_convergence"));
  bool converged = true, monotone = true;
  std::string broken;
  for (const auto& [key, value] : r.summary) {
    if (key.rfind("final_error_", 0) == 0 && !(value < 1e-8)) converged = false;
    if (key.rfind("monotone_", 0) == 0 && value != 1.0) {
      monotone = false;
      broken += " " + key.substr(9);
    }
  }
  return {converged && monotone,
          std::string("all final errors < 1e-8: ") + (converged ? "yes" : "no") +
              (monotone ? ", all curves monotone" : ", not monotone:" + broken)};
}

Outcome criterion5() {
  const Graph g = geometric(20, 14);
  const Operator L = build_laplacian(g, kShifted);
  const auto sd = spectral_decompose(L);
  const DesignReport rep = design_arma(lowpass_step(-0.5), 3, kBand);
  const auto& coeffs = std::get<ArmaParallelCoefficients>(rep.coefficients);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> fu(0.0, 0.5);
  std::uniform_int_distribution<int> nu(0, 19);
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const double f = fu(rng);
    const int n = nu(rng);
    const Signal v = sd.eigenvectors.col(n).cast<Complex>();
    const SignalSource x = [&](long t) -> Signal { return temporal_point(f * static_cast<double>(t)) * v; };
    const auto trace = parallel_arma_run(coeffs, constant_operator(L), x, rounds(201));
    const Complex expected = joint_transfer_parallel(coeffs, temporal_point(f), sd.eigenvalues[n]);
    const Complex gain = v.dot(trace.z[199]) / temporal_point(f * 200.0);
    worst = std::max(worst, std::abs(gain - expected));
  }
  return {worst < 1e-3, "worst gain error " + fmt(worst)};
}

Outcome criterion6() {
  const FilterDesign d = tikhonov_design(0.5, 1, kShifted);
  const Complex psi = d.coeffs.branches[0].psi, phi = d.coeffs.branches[0].phi;
  const long T = 100;
  long pairs = 0, violations = 0, runs_violating = 0;
  double worst_ratio = 0.0;
  for (double p : {0.05, 0.2}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const Graph g = geometric(30, 1000 + seed);
      DynamicsConfig dc;
      dc.kind = DynamicsKind::edge_failure;
      dc.p = p;
      dc.seed = derive_seed(seed, 6);
      GraphDynamics dyn(dc, g);
      const OperatorSource ops = [&, L = Operator()](long) mutable -> const Operator& {
        L = build_laplacian(dyn.next(), kShifted);
        return L;
      };
      const Signal x = random_signal(30, seed);
      const auto trace = arma1_run(psi, phi, 0.0, ops, constant_signal(x), rounds(T));
      bool any = false;
      for (long t2 = 1; t2 <= T; t2 += 3) {
        for (long t1 = t2; t1 <= T; t1 += 4) {
          const double eps = (trace.z[static_cast<std::size_t>(t1 - 1)] - trace.z[static_cast<std::size_t>(t2 - 1)]).norm() / x.norm();
          const double bound = convergence_distance_bound(psi, phi, 0.0, 1.0, 0.0, x.norm(), 0.0, t1, t2);
          ++pairs;
          if (eps > bound * (1.0 + 1e-9) + 1e-12) {
            ++violations;
            any = true;
            worst_ratio = std::max(worst_ratio, bound > 0 ? eps / bound : std::numeric_limits<double>::infinity());
          }
        }
      }
      runs_violating += any ? 1 : 0;
    }
  }
  return {violations == 0, std::to_string(violations) + " of " + std::to_string(pairs) + " pairs violate the bound in " +
                               std::to_string(runs_violating) + " of 200 sequences" +
                               (violations ? ", worst eps/bound " + fmt(worst_ratio) : "")};
}

Outcome criterion7() {
  const ExperimentResult r = run_experiment(ExperimentConfig::defaults("fig5_denoise_tv"));
  const double arma = r.summary.at("avg_error_arma1");
  bool below = true;
  std::string firs;
  for (int K : {1, 3, 5}) {
    const double f = r.summary.at("avg_error_fir_K" + std::to_string(K));
    below = below && arma < f;
    firs += " FIR_" + std::to_string(K) + " " + fmt(f);
  }
  const double gap = r.summary.at("static_remark_gap");
  return {below && gap < 1e-8, "ARMA_1 " + fmt(arma) + " vs" + firs + ", static round-K gap " + fmt(gap)};
}

Outcome criterion8() {
  const ExperimentResult r = run_experiment(ExperimentConfig::defaults("interference"));
  const double corr = r.summary.at("attenuation_db_correlated");
  const double uncorr = r.summary.at("attenuation_db_uncorrelated");
  return {corr >= 10.0 && uncorr >= 10.0,
          "attenuation " + fmt(corr) + " dB correlated, " + fmt(uncorr) + " dB uncorrelated"};
}

Outcome criterion9() {
  ExperimentConfig cfg = ExperimentConfig::defaults("fig7_lowpass_mobility");
  cfg.n = 50;
  cfg.speeds = {0.0, 1.0, 3.0};
  cfg.repetitions = 5;
  const ExperimentResult r = run_experiment(cfg);
  bool ordered = true, static_ok = true;
  std::ostringstream os;
  for (int K : cfg.orders) {
    const std::string k = std::to_string(K);
    const double v0 = r.summary.at("arma_mean_K" + k + "_v0");
    const double v1 = r.summary.at("arma_mean_K" + k + "_v1");
    const double v3 = r.summary.at("arma_mean_K" + k + "_v3");
    ordered = ordered && v0 <= v1 && v1 <= v3;
    static_ok = static_ok && r.summary.at("static_gap_K" + k) < 1e-3;
    os << " K" << K << " " << fmt(v0) << "/" << fmt(v1) << "/" << fmt(v3) << ";";
  }
  return {ordered && static_ok && r.summary.at("divergences") == 0.0,
          "errors at speeds 0/1/3:" + os.str() + (static_ok ? " static residual matched" : " static residual mismatch")};
}

Outcome criterion10() {
  std::vector<std::string> broken;

  double gft_worst = 0.0;
  for (int n : {5, 40, 120}) {
    const auto sd = spectral_decompose(build_laplacian(geometric(n, 31), kShifted));
    const Signal x = random_signal(n, 32, true);
    const Signal xh = gft(sd, x);
    gft_worst = std::max({gft_worst, rel(igft(sd, xh), x), std::abs(xh.norm() - x.norm()) / x.norm()});
  }
  if (!(gft_worst < 1e-10)) broken.push_back("gft");

  double ltv_worst = 0.0;
  std::mt19937_64 rng(33);
  std::bernoulli_distribution coin(0.5);
  for (int n = 2; n <= 5; ++n) {
    for (int t = 0; t <= 6; ++t) {
      std::vector<Operator> seq;
      for (int s = 0; s <= t; ++s) {
        std::vector<Edge> edges;
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j)
            if (coin(rng)) edges.push_back({i, j, 1.0});
        seq.push_back(build_laplacian(Graph(n, edges), kShifted));
      }
      std::vector<Signal> xs;
      for (int s = 0; s <= t; ++s) xs.push_back(random_signal(n, 40u + static_cast<std::uint64_t>(s)));
      ltv_worst = std::max(ltv_worst, JointLaplacian(seq).identity_residual(xs));
    }
  }
  if (!(ltv_worst < 1e-10)) broken.push_back("joint Laplacian");

  double pf_worst = 0.0;
  bool predicates = true;
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Complex> poles;
    for (int k = 0; k < 4; ++k) poles.push_back(Complex(normal(rng) * 2, normal(rng) * 2));
    const Polynomial monic = poly_from_roots(poles);
    RationalResponse rr;
    rr.a = poly_scale(monic, 1.0 / monic[0]);
    rr.a[0] = 1.0;
    for (int k = 0; k <= 4; ++k) rr.b.push_back(Complex(normal(rng), normal(rng)));
    const ResiduePoleForm rp = to_residue_pole(rr);
    for (int i = 0; i < 50; ++i) {
      const double l = uni(rng) * 3.0;
      pf_worst = std::max(pf_worst, std::abs(rp(l) - rr(l)) / std::max(1.0, std::abs(rr(l))));
    }
    const auto par = parallel_from_residue_pole(rp);
    for (double rho : {0.5, 1.0, 2.0}) {
      const SpectralBounds b{-rho, rho};
      bool outside = true;
      for (Complex p : par.poles()) outside = outside && std::abs(p) > rho;
      predicates = predicates && check_stability(par, b).stable == outside && par.is_stable(rho) == outside;
      const auto per = periodic_from_rational(rr);
      double sup = 0.0;
      for (double l : uniform_grid(-rho, rho, 4001)) sup = std::max(sup, std::abs(per.cycle_gain(l)));
      const StabilityReport sr = check_stability(per, b);
      predicates = predicates && sr.stable == (std::abs(per.cycle_gain(rho)) < 1.0) &&
                   std::abs(sr.band_factor - sup) <= 1e-6 * std::max(1.0, sup);
    }
  }
  if (!(pf_worst < 1e-6)) broken.push_back("partial fractions");
  if (!predicates) broken.push_back("stability predicates");

  bool messages = true;
  const Graph g = geometric(25, 34);
  const Operator L = build_laplacian(g, kShifted);
  const std::size_t M = g.num_edges();
  const Signal x = random_signal(25, 35);
  for (int K = 1; K <= 4; ++K) {
    ArmaParallelCoefficients par;
    ArmaPeriodicCoefficients per;
    for (int k = 0; k < K; ++k) {
      par.branches.push_back({0.1 * (k + 1), 1.0});
      per.cycle.push_back({k == 0 ? 0.0 : 1.0, 0.1, 0.5});
    }
    const auto a = parallel_arma_run(par, constant_operator(L), constant_signal(x), rounds(6));
    const auto b = periodic_arma_run(per, constant_operator(L), constant_signal(x), rounds(6));
    for (auto m : a.messages) messages = messages && m == 2 * M * static_cast<std::size_t>(K);
    for (auto m : b.messages) messages = messages && m == 2 * M;
  }
  if (!messages) broken.push_back("message counts");

  std::string detail = "gft " + fmt(gft_worst) + ", joint Laplacian " + fmt(ltv_worst) + ", partial fractions " +
                       fmt(pf_worst);
  for (const auto& b : broken) detail += ", broken: " + b;
  return {broken.empty(), detail};
}

std::set<int> parse_list(const std::string& s) {
  std::set<int> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(std::stoi(item));
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected_failures, only;
  for (int i = 1; i < argc; ++i) {
    const std::string arg = argv[i];
    if (arg == "--expect-fail" && i + 1 < argc) expected_failures = parse_list(argv[++i]);
    else if (arg == "--only" && i + 1 < argc) only = parse_list(argv[++i]);
    else {
      std::cerr << "usage: acceptance [--expect-fail 3,4] [--only 1,2]\n";
      return 2;
    }
  }

  struct Criterion {
    int id;
    double limit_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{
      {1, 1.0, criterion1},   {2, 5.0, criterion2},   {3, 5.0, criterion3},  {4, 10.0, criterion4},
      {5, 10.0, criterion5},  {6, 30.0, criterion6},  {7, 60.0, criterion7}, {8, 60.0, criterion8},
      {9, 300.0, criterion9}, {10, 60.0, criterion10}};

  std::set<int> failed;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("threw: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs >= c.limit_s) {
      out.pass = false;
      out.detail += ", over the " + fmt(c.limit_s) + " s limit";
    }
    if (!out.pass) failed.insert(c.id);
    char timing[32];
    std::snprintf(timing, sizeof timing, "%.2f s", secs);
    std::cout << "criterion " << c.id << ": " << (out.pass ? "PASS" : "FAIL") << "  (" << out.detail << "; "
              << timing << ")" << std::endl;
  }

  std::set<int> expected;
  for (int id : expected_failures)
    if (only.empty() || only.count(id)) expected.insert(id);
  if (failed == expected) return 0;
  for (int id : failed)
    if (!expected.count(id)) std::cout << "unexpected failure: criterion " << id << "\n";
  for (int id : expected)
    if (!failed.count(id)) std::cout << "unexpected pass: criterion " << id << "\n";
  return 1;
}
