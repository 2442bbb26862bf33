#include "armagf/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>
#include <sstream>

#include "armagf/applications.hpp"
#include "armagf/design.hpp"
#include "armagf/filters.hpp"
#include "armagf/fir.hpp"
#include "armagf/io.hpp"
#include "json.hpp"

namespace armagf {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::vector<std::string> kExperimentIds = {
    "fig1_responses", "fig2_denoise_convergence", "interference", "fig5_denoise_tv",
    "fig7_lowpass_mobility"};

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    s += x;
    ++n;
  }
  return n ? s / static_cast<double>(n) : kNaN;
}

double std_of(const std::vector<double>& v) {
  const double m = mean_of(v);
  double s = 0.0;
  std::size_t n = 0;
  for (double x : v) {
    if (std::isnan(x)) continue;
    s += (x - m) * (x - m);
    ++n;
  }
  return n > 1 ? std::sqrt(s / static_cast<double>(n - 1)) : 0.0;
}

std::string key_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

const LaplacianVariant kShiftedNormalized{LaplacianKind::shifted_normalized, std::nullopt};
const LaplacianVariant kNormalized{LaplacianKind::normalized, std::nullopt};

/// Low-pass step 1{lambda_n < cutoff} expressed in mu = lambda_n - 1.
Response shifted_lowpass(double cutoff) {
  return [mu_c = cutoff - 1.0](double mu) { return Complex(mu < mu_c ? 1.0 : 0.0); };
}

Signal smooth_plus_noise(const SpectralDecomposition& sd, std::uint64_t seed) {
  Signal uh(sd.size());
  for (Eigen::Index i = 0; i < sd.size(); ++i) uh[i] = std::exp(-5.0 * sd.eigenvalues[i]);
  Signal x = igft(sd, uh);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  for (Eigen::Index i = 0; i < x.size(); ++i) x[i] += normal(rng);
  return x;
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  return mix(mix(mix(base) ^ a) ^ (b * 0x632be59bd9b4e019ULL));
}

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

double filtering_error(const Signal& z, const Signal& reference) {
  return (z - reference).norm() / reference.norm();
}

double response_error(const SpectralDecomposition& sd, const Signal& x, const Signal& y,
                      const std::function<Complex(double)>& target, double threshold) {
  const Signal xh = gft(sd, x);
  const Signal yh = gft(sd, y);
  const double cut = threshold * xh.norm();
  double num = 0.0, den = 0.0;
  bool any = false;
  for (Eigen::Index n = 0; n < xh.size(); ++n) {
    if (std::abs(xh[n]) <= cut) continue;
    any = true;
    const Complex g_star = target(sd.eigenvalues[n]);
    num += std::norm(yh[n] / xh[n] - g_star);
    den += std::norm(g_star);
  }
  if (!any || den == 0.0) return kNaN;
  return std::sqrt(num / den);
}

ExperimentConfig ExperimentConfig::defaults(const std::string& id) {
  ExperimentConfig c;
  c.experiment = id;
  if (id == "fig1_responses") {
    c.orders = {3, 5, 10};
    c.fir_orders = {3, 5, 10};
    c.rounds = 0;
  } else if (id == "fig2_denoise_convergence") {
    c.orders = {1, 2};
    c.weights = {0.5, 1.0, 2.0};
    c.rounds = 100;
  } else if (id == "interference") {
    c.orders = {5};
    c.rounds = 400;
    c.discard = 100;
  } else if (id == "fig5_denoise_tv") {
    c.dynamics.kind = DynamicsKind::edge_failure;
    c.dynamics.p = 0.05;
    c.orders = {1};
    c.weights = {0.5};
    c.fir_orders = {1, 3, 5};
    c.rounds = 300;
    c.discard = 49;
    c.repetitions = 20;
  } else if (id == "fig7_lowpass_mobility") {
    c.dynamics.kind = DynamicsKind::random_waypoint;
    c.orders = {2, 4, 6};
    c.fir_orders = {2, 4, 6};
    c.speeds = {0.0, 1.0, 2.0, 3.0};
    c.rounds = 600;
    c.discard = 100;
    c.repetitions = 20;
  } else {
    throw InvalidArgument("unknown experiment '" + id + "'");
  }
  return c;
}

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
  using nlohmann::json;
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.contains("experiment")) throw InvalidArgument("config needs an 'experiment' key");
  ExperimentConfig c = defaults(j["experiment"].get<std::string>());
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& k = it.key();
      const json& v = it.value();
      if (k == "experiment") continue;
      if (k == "n") c.n = v.get<int>();
      else if (k == "radius") c.radius = v.is_null() ? std::nullopt : std::optional<double>(v.get<double>());
      else if (k == "graph_file") c.graph_file = v.get<std::string>();
      else if (k == "orders") c.orders = v.get<std::vector<int>>();
      else if (k == "weights") c.weights = v.get<std::vector<double>>();
      else if (k == "speeds") c.speeds = v.get<std::vector<double>>();
      else if (k == "fir_orders") c.fir_orders = v.get<std::vector<int>>();
      else if (k == "cutoff") c.cutoff = v.get<double>();
      else if (k == "rounds") c.rounds = v.get<long>();
      else if (k == "discard") c.discard = v.get<long>();
      else if (k == "repetitions") c.repetitions = v.get<int>();
      else if (k == "seed") c.seed = v.get<std::uint64_t>();
      else if (k == "output_dir") c.output_dir = v.get<std::string>();
      else if (k == "density_scaling") c.density_scaling = v.get<bool>();
      else if (k == "fir_basis") c.fir_basis = parse_laplacian_kind(v.get<std::string>());
      else if (k == "dynamics") {
        for (auto d = v.begin(); d != v.end(); ++d) {
          const std::string& dk = d.key();
          if (dk == "kind") c.dynamics.kind = parse_dynamics_kind(d.value().get<std::string>());
          else if (dk == "p") c.dynamics.p = d.value().get<double>();
          else if (dk == "area") c.dynamics.area = d.value().get<double>();
          else if (dk == "range") c.dynamics.range = d.value().get<double>();
          else if (dk == "vmin") c.dynamics.vmin = d.value().get<double>();
          else if (dk == "vmax") c.dynamics.vmax = d.value().get<double>();
          else if (dk == "seed") c.dynamics.seed = d.value().get<std::uint64_t>();
          else throw InvalidArgument("unknown dynamics key '" + dk + "'");
        }
      } else {
        throw InvalidArgument("unknown config key '" + k + "'");
      }
    }
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("bad config value: ") + e.what());
  }
  c.validate();
  return c;
}

void ExperimentConfig::validate() const {
  if (std::find(kExperimentIds.begin(), kExperimentIds.end(), experiment) == kExperimentIds.end()) {
    throw InvalidArgument("unknown experiment '" + experiment + "'");
  }
  if (n < 2) throw InvalidArgument("need at least 2 nodes");
  if (radius && !(*radius > 0.0)) throw InvalidArgument("radius must be positive");
  if (!graph_file.empty() && !std::filesystem::exists(graph_file)) {
    throw InvalidArgument("graph file does not exist: " + graph_file);
  }
  if (repetitions < 1) throw InvalidArgument("repetitions must be at least 1");
  if (rounds < 0 || discard < 0 || discard >= std::max(rounds, 1L)) {
    if (!(rounds == 0 && discard == 0)) throw InvalidArgument("need 0 <= discard < rounds");
  }
  for (int k : orders) {
    if (k < 1) throw InvalidArgument("filter orders must be at least 1");
  }
  for (int k : fir_orders) {
    if (k < 0) throw InvalidArgument("FIR orders must be non-negative");
  }
  for (double w : weights) {
    if (!(w > 0.0)) throw InvalidArgument("weights must be positive");
  }
  for (double v : speeds) {
    if (!(v >= 0.0)) throw InvalidArgument("speeds must be non-negative");
  }
  if (!(cutoff > 0.0 && cutoff < 2.0)) throw InvalidArgument("cutoff must lie in (0, 2)");
  if (fir_basis != LaplacianKind::normalized && fir_basis != LaplacianKind::shifted_normalized) {
    throw InvalidArgument("fir_basis must be normalized or shifted_normalized");
  }
  dynamics.validate();
}

Graph experiment_graph(const ExperimentConfig& cfg, std::uint64_t seed) {
  if (!cfg.graph_file.empty()) return read_edge_list_file(cfg.graph_file);
  return random_geometric_graph(cfg.n, cfg.radius.value_or(default_connection_radius()), seed).graph;
}

namespace {

// ---------------------------------------------------------------- fig1

ExperimentResult run_fig1(const ExperimentConfig& cfg) {
  ExperimentResult res;
  const SpectralBounds bounds = kShiftedNormalized.bounds();
  const auto grid = uniform_grid(bounds.lambda_min, bounds.lambda_max, kDefaultGridSize);
  const Response target = shifted_lowpass(cfg.cutoff);

  Table curves{"fig1_responses", {"lambda", "target"}, {}};
  std::vector<std::vector<double>> columns;
  Table summary{"fig1_summary", {"K", "arma_rms", "stable", "min_margin"}, {}};
  for (int K : cfg.orders) {
    curves.columns.push_back("arma_K" + std::to_string(K));
    try {
      const DesignReport rep = design_arma(target, K, bounds, Architecture::parallel, std::nullopt,
                                           kDefaultGridSize, "lowpass_" + key_number(cfg.cutoff));
      std::vector<double> col;
      for (double l : grid) col.push_back(response_static(rep.coefficients, l).real());
      columns.push_back(std::move(col));
      const double margin = *std::min_element(rep.stability.margins.begin(), rep.stability.margins.end());
      summary.rows.push_back({double(K), rep.rms_error, rep.stability.stable ? 1.0 : 0.0, margin});
      res.summary["arma_rms_K" + std::to_string(K)] = rep.rms_error;
      res.summary["arma_stable_K" + std::to_string(K)] = rep.stability.stable ? 1.0 : 0.0;
      res.documents["design_K" + std::to_string(K) + ".json"] = rep.to_json();
    } catch (const Error& e) {
      columns.emplace_back(grid.size(), kNaN);
      res.notes.push_back("ARMA K=" + std::to_string(K) + ": " + e.what());
    }
  }
  Table fir_summary{"fig1_fir_summary", {"K", "fir_rms"}, {}};
  for (int K : cfg.fir_orders) {
    curves.columns.push_back("fir_K" + std::to_string(K));
    const FirDesign fd = fir_design_ls(target, K, grid);
    std::vector<double> col;
    for (double l : grid) col.push_back(fd.coeffs.response(l).real());
    columns.push_back(std::move(col));
    fir_summary.rows.push_back({double(K), fd.rms_error});
    res.summary["fir_rms_K" + std::to_string(K)] = fd.rms_error;
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    std::vector<double> row{grid[i], target(grid[i]).real()};
    for (const auto& col : columns) row.push_back(col[i]);
    curves.rows.push_back(std::move(row));
  }
  res.tables = {curves, summary, fir_summary};
  return res;
}

// ---------------------------------------------------------------- fig2

ExperimentResult run_fig2(const ExperimentConfig& cfg) {
  ExperimentResult res;
  Table errors{"fig2_error", {"t"}, {}};
  std::vector<std::vector<double>> curves;

  const Graph g = experiment_graph(cfg, derive_seed(cfg.seed, 0));
  const auto sd = spectral_decompose(build_laplacian(g, kNormalized));
  const Signal t = smooth_plus_noise(sd, derive_seed(cfg.seed, 1));
  const Operator L = build_laplacian(g, kShiftedNormalized);

  for (int K : cfg.orders) {
    for (double w : cfg.weights) {
      const std::string tag = "K" + std::to_string(K) + "_w" + key_number(w);
      errors.columns.push_back(tag);
      const Signal x_tilde = tikhonov_direct(g, DenoiseProblem{t, w, K, kNormalized});
      const FilterDesign d = tikhonov_design(w, K, kShiftedNormalized);
      RunOptions opt;
      opt.rounds = cfg.rounds;
      opt.y0 = t;
      std::vector<double> e;
      try {
        const auto trace = parallel_arma_run(d.coeffs, constant_operator(L), constant_signal(t), opt);
        for (const Signal& z : trace.z) e.push_back(filtering_error(z, x_tilde));
      } catch (const DivergenceError& err) {
        res.notes.push_back(tag + ": " + err.what());
        e.assign(static_cast<std::size_t>(cfg.rounds), kNaN);
      }
      bool monotone = true;
      for (std::size_t i = 5; i < e.size(); ++i) {
        if (!(e[i] <= e[i - 1] + 1e-12)) monotone = false;
      }
      res.summary["final_error_" + tag] = e.empty() ? kNaN : e.back();
      res.summary["monotone_" + tag] = monotone ? 1.0 : 0.0;
      res.summary["stable_" + tag] = d.stability.stable ? 1.0 : 0.0;
      curves.push_back(std::move(e));
    }
  }
  for (long r = 0; r < cfg.rounds; ++r) {
    std::vector<double> row{double(r + 1)};
    for (const auto& c : curves) row.push_back(c[static_cast<std::size_t>(r)]);
    errors.rows.push_back(std::move(row));
  }
  res.tables = {errors};
  return res;
}

// ---------------------------------------------------------------- interference

struct TemporalLines {
  double signal = 0.0;
  double interferer = 0.0;
};

// Node-averaged DFT magnitude over rounds [first, first + len) at the bins of
// the two temporal lines.
TemporalLines temporal_lines(const std::vector<Signal>& z, std::size_t first, std::size_t len,
                             double f_signal, double f_interf) {
  TemporalLines out;
  const Eigen::Index n = z.front().size();
  for (Eigen::Index node = 0; node < n; ++node) {
    Complex s = 0.0, v = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const Complex val = z[first + k][node];
      const double phase = -2.0 * std::numbers::pi * static_cast<double>(k);
      s += val * std::polar(1.0, phase * f_signal);
      v += val * std::polar(1.0, phase * f_interf);
    }
    out.signal += std::abs(s) / static_cast<double>(n);
    out.interferer += std::abs(v) / static_cast<double>(n);
  }
  return out;
}

std::vector<double> node_averaged_spectrum(const std::vector<Signal>& z, std::size_t first,
                                           std::size_t len) {
  std::vector<double> spec(len, 0.0);
  const Eigen::Index n = z.front().size();
  for (std::size_t bin = 0; bin < len; ++bin) {
    const double f = static_cast<double>(bin) / static_cast<double>(len);
    for (Eigen::Index node = 0; node < n; ++node) {
      Complex acc = 0.0;
      for (std::size_t k = 0; k < len; ++k) {
        acc += z[first + k][node] * std::polar(1.0, -2.0 * std::numbers::pi * f * static_cast<double>(k));
      }
      spec[bin] += std::abs(acc) / static_cast<double>(n);
    }
  }
  return spec;
}

double to_db(double ratio) { return 20.0 * std::log10(ratio); }

ExperimentResult run_interference(const ExperimentConfig& cfg) {
  ExperimentResult res;
  constexpr double f_signal = 1.0 / 20.0;   // pi/10 rad/sample
  constexpr double f_interf = 9.0 / 20.0;   // 9 pi/10 rad/sample
  constexpr double noise_var = 0.1;
  const int K = cfg.orders.empty() ? 5 : cfg.orders.front();
  const auto first = static_cast<std::size_t>(cfg.discard);
  const auto len = static_cast<std::size_t>(cfg.rounds - cfg.discard);

  const SpectralBounds bounds = kShiftedNormalized.bounds();
  const DesignReport design = design_arma(shifted_lowpass(cfg.cutoff), K, bounds);
  res.documents["design_K" + std::to_string(K) + ".json"] = design.to_json();
  const ArmaCoefficients coeffs = design.coefficients;

  std::vector<double> att_corr, att_uncorr, att_input;
  std::vector<std::vector<double>> e_total(static_cast<std::size_t>(cfg.rounds)),
      e_interf(static_cast<std::size_t>(cfg.rounds));
  std::vector<double> spec_in, spec_out;

  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const Graph g = experiment_graph(cfg, derive_seed(cfg.seed, static_cast<std::uint64_t>(rep), 0));
    const auto sd = spectral_decompose(build_laplacian(g, kNormalized));
    const Operator L = build_laplacian(g, kShiftedNormalized);
    const Eigen::Index n = g.num_nodes();

    Signal band(n), heat(n);
    for (Eigen::Index i = 0; i < n; ++i) {
      band[i] = sd.eigenvalues[i] < cfg.cutoff ? 1.0 : 0.0;
      heat[i] = std::exp(-sd.eigenvalues[i]);
    }
    const Signal u0 = igft(sd, band);
    const Signal v_heat = igft(sd, heat);

    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(rep), 1));
    std::normal_distribution<double> normal(0.0, std::sqrt(noise_var));
    std::vector<Signal> u, noise, x_corr, x_uncorr, x_clean;
    for (long t = 0; t < cfg.rounds; ++t) {
      const Complex a = std::polar(1.0, std::numbers::pi * t / 10.0);
      const Complex b = std::polar(1.0, 9.0 * std::numbers::pi * t / 10.0);
      Signal nz(n);
      for (Eigen::Index i = 0; i < n; ++i) nz[i] = normal(rng);
      u.push_back(a * u0);
      x_clean.push_back(u.back() + nz);
      x_corr.push_back(x_clean.back() + b * u0);
      x_uncorr.push_back(x_clean.back() + b * v_heat);
      noise.push_back(std::move(nz));
    }

    RunOptions opt;
    opt.rounds = cfg.rounds;
    try {
      const auto Ls = constant_operator(L);
      const auto z_corr = arma_run(coeffs, Ls, signal_sequence(x_corr), opt);
      const auto z_uncorr = arma_run(coeffs, Ls, signal_sequence(x_uncorr), opt);
      const auto z_clean = arma_run(coeffs, Ls, signal_sequence(x_clean), opt);

      const auto in = temporal_lines(x_corr, first, len, f_signal, f_interf);
      const auto out_c = temporal_lines(z_corr.z, first, len, f_signal, f_interf);
      const auto out_u = temporal_lines(z_uncorr.z, first, len, f_signal, f_interf);
      att_input.push_back(to_db(in.signal / in.interferer));
      att_corr.push_back(to_db(out_c.signal / out_c.interferer));
      att_uncorr.push_back(to_db(out_u.signal / out_u.interferer));
      if (rep == 0) {
        spec_in = node_averaged_spectrum(x_corr, first, len);
        spec_out = node_averaged_spectrum(z_corr.z, first, len);
      }
      // Output of round t + 1 is compared with the input of round t.
      for (long t = 0; t < cfg.rounds; ++t) {
        const auto i = static_cast<std::size_t>(t);
        const Signal zh = gft(sd, z_uncorr.z[i]);
        const Signal zs = gft(sd, z_clean.z[i]);
        const Signal uh = gft(sd, u[i]);
        e_total[i].push_back((zh - uh).norm() / uh.norm());
        e_interf[i].push_back((zh - zs).norm() / zs.norm());
      }
    } catch (const DivergenceError& err) {
      res.notes.push_back("repetition " + std::to_string(rep) + ": " + err.what());
    }
  }

  Table errors{"interference_error", {"t", "e_total", "e_interf"}, {}};
  for (long t = 0; t < cfg.rounds; ++t) {
    const auto i = static_cast<std::size_t>(t);
    errors.rows.push_back({double(t + 1), mean_of(e_total[i]), mean_of(e_interf[i])});
  }
  Table spectrum{"interference_spectrum", {"f", "input", "output"}, {}};
  for (std::size_t b = 0; b < spec_in.size(); ++b) {
    spectrum.rows.push_back({double(b) / double(len), spec_in[b], spec_out[b]});
  }
  res.summary["attenuation_db_correlated"] = mean_of(att_corr);
  res.summary["attenuation_db_correlated_std"] = std_of(att_corr);
  res.summary["attenuation_db_uncorrelated"] = mean_of(att_uncorr);
  res.summary["input_ratio_db"] = mean_of(att_input);
  res.summary["design_rms"] = design.rms_error;
  res.summary["design_stable"] = design.stability.stable ? 1.0 : 0.0;
  res.summary["final_e_total"] = errors.rows.empty() ? kNaN : errors.rows.back()[1];
  res.summary["final_e_interf"] = errors.rows.empty() ? kNaN : errors.rows.back()[2];
  res.tables = {errors, spectrum};
  return res;
}

// ---------------------------------------------------------------- fig5

std::vector<Graph> graph_trace(GraphDynamics& dyn, long rounds) {
  std::vector<Graph> graphs;
  graphs.reserve(static_cast<std::size_t>(rounds));
  for (long t = 0; t < rounds; ++t) graphs.push_back(dyn.next(1.0));
  return graphs;
}

std::vector<Operator> operators_of(const std::vector<Graph>& graphs, const LaplacianVariant& v) {
  std::vector<Operator> ops;
  ops.reserve(graphs.size());
  for (const Graph& g : graphs) ops.push_back(build_laplacian(g, v));
  return ops;
}

// FIR operators reuse the ARMA sequence when the bases coincide.
std::vector<Operator> fir_operators(const std::vector<Graph>& graphs, const std::vector<Operator>& arma_ops,
                                    const LaplacianVariant& fir_basis) {
  if (fir_basis.kind == LaplacianKind::shifted_normalized) return arma_ops;
  return operators_of(graphs, fir_basis);
}

ExperimentResult run_fig5(const ExperimentConfig& cfg) {
  ExperimentResult res;
  const double w = cfg.weights.empty() ? 0.5 : cfg.weights.front();
  const FilterDesign arma = tikhonov_design(w, 1, kShiftedNormalized);
  const Complex psi = arma.coeffs.branches[0].psi;
  const Complex phi = arma.coeffs.branches[0].phi;
  const LaplacianVariant fir_basis{cfg.fir_basis, std::nullopt};
  const double fir_shift = fir_basis.kind == LaplacianKind::shifted_normalized ? 1.0 : 0.0;
  const Response tik = [w, fir_shift](double v) { return Complex(1.0 / (1.0 + w * (v + fir_shift))); };

  std::vector<FirCoefficients> firs;
  for (int K : cfg.fir_orders) firs.push_back(fir_design_ls(tik, K, fir_basis.bounds()).coeffs);

  const auto rounds = static_cast<std::size_t>(cfg.rounds);
  std::vector<std::vector<double>> curves(1 + firs.size(), std::vector<double>(rounds, 0.0));
  std::vector<std::vector<double>> averages(1 + firs.size());
  std::vector<double> remark_gap, static_limit;

  for (int rep = 0; rep < cfg.repetitions; ++rep) {
    const auto rep_id = static_cast<std::uint64_t>(rep);
    const Graph g = experiment_graph(cfg, derive_seed(cfg.seed, rep_id, 0));
    const auto sd = spectral_decompose(build_laplacian(g, kNormalized));
    const Signal x = smooth_plus_noise(sd, derive_seed(cfg.seed, rep_id, 1));
    const Signal x_tilde = tikhonov_direct(g, DenoiseProblem{x, w, 1, kNormalized});

    DynamicsConfig dc = cfg.dynamics;
    dc.seed = derive_seed(cfg.seed, rep_id, 2);
    GraphDynamics dyn(dc, g);
    const std::vector<Graph> graphs = graph_trace(dyn, cfg.rounds);
    const std::vector<Operator> ops = operators_of(graphs, kShiftedNormalized);
    const std::vector<Operator> fops = fir_operators(graphs, ops, fir_basis);

    std::vector<std::vector<double>> e(1 + firs.size(), std::vector<double>(rounds, kNaN));
    RunOptions opt;
    opt.rounds = cfg.rounds;
    opt.y0 = x;
    try {
      const auto trace = arma1_run(psi, phi, 0.0, operator_sequence_view(ops), constant_signal(x), opt);
      for (std::size_t t = 0; t < rounds; ++t) e[0][t] = filtering_error(trace.z[t], x_tilde);
    } catch (const DivergenceError& err) {
      res.notes.push_back("repetition " + std::to_string(rep) + ": " + err.what());
    }
    for (std::size_t f = 0; f < firs.size(); ++f) {
      const auto K = static_cast<std::size_t>(firs[f].order());
      for (std::size_t t = K == 0 ? 0 : K - 1; t < rounds; ++t) {
        e[f + 1][t] = filtering_error(fir_apply_timevarying(firs[f], fops, x, t), x_tilde);
      }
    }
    for (std::size_t f = 0; f < e.size(); ++f) {
      std::vector<double> window(e[f].begin() + cfg.discard, e[f].end());
      averages[f].push_back(mean_of(window));
      for (std::size_t t = 0; t < rounds; ++t) curves[f][t] += e[f][t] / cfg.repetitions;
    }

    // Static control: the recursion from y0 = 0 truncated after K + 1 rounds is
    // the FIR with taps phi psi^k, and the recursion converges to x_tilde.
    const Operator L0 = build_laplacian(g, kShiftedNormalized);
    RunOptions sopt;
    sopt.rounds = std::max<long>(cfg.rounds, 1);
    const auto strace = arma1_run(psi, phi, 0.0, constant_operator(L0), constant_signal(x), sopt);
    double gap = 0.0;
    for (int K : cfg.fir_orders) {
      FirCoefficients taps;
      for (int k = 0; k <= K; ++k) taps.h.push_back(phi * std::pow(psi, k));
      const Signal ref = fir_apply_static(taps, L0, x);
      gap = std::max(gap, (strace.z[static_cast<std::size_t>(K)] - ref).norm() / ref.norm());
    }
    remark_gap.push_back(gap);
    static_limit.push_back(filtering_error(strace.z.back(), x_tilde));
  }

  Table errors{"fig5_error", {"t", "arma1"}, {}};
  for (int K : cfg.fir_orders) errors.columns.push_back("fir_K" + std::to_string(K));
  for (std::size_t t = 0; t < rounds; ++t) {
    std::vector<double> row{double(t + 1)};
    for (const auto& c : curves) row.push_back(c[t]);
    errors.rows.push_back(std::move(row));
  }
  Table reps{"fig5_repetitions", {"repetition", "arma1"}, {}};
  for (int K : cfg.fir_orders) reps.columns.push_back("fir_K" + std::to_string(K));
  for (int r = 0; r < cfg.repetitions; ++r) {
    std::vector<double> row{double(r)};
    for (const auto& a : averages) row.push_back(a[static_cast<std::size_t>(r)]);
    reps.rows.push_back(std::move(row));
  }
  res.summary["avg_error_arma1"] = mean_of(averages[0]);
  res.summary["avg_error_arma1_std"] = std_of(averages[0]);
  for (std::size_t f = 0; f < firs.size(); ++f) {
    const std::string tag = "fir_K" + std::to_string(cfg.fir_orders[f]);
    res.summary["avg_error_" + tag] = mean_of(averages[f + 1]);
    res.summary["avg_error_" + tag + "_std"] = std_of(averages[f + 1]);
  }
  res.summary["static_remark_gap"] = *std::max_element(remark_gap.begin(), remark_gap.end());
  res.summary["static_limit_error"] = *std::max_element(static_limit.begin(), static_limit.end());
  res.summary["divergences"] = static_cast<double>(res.notes.size());
  res.tables = {errors, reps};
  return res;
}

// ---------------------------------------------------------------- fig7

ExperimentResult run_fig7(const ExperimentConfig& cfg) {
  ExperimentResult res;
  const SpectralBounds bounds = kShiftedNormalized.bounds();
  const Response target = shifted_lowpass(cfg.cutoff);

  std::vector<std::pair<int, ArmaCoefficients>> armas;
  for (int K : cfg.orders) {
    const DesignReport rep = design_arma(target, K, bounds);
    res.documents["design_K" + std::to_string(K) + ".json"] = rep.to_json();
    armas.emplace_back(K, rep.coefficients);
  }
  // The step is 1{lambda < cutoff} in the unshifted frequency.
  const LaplacianVariant fir_basis{cfg.fir_basis, std::nullopt};
  const Response fir_target = fir_basis.kind == LaplacianKind::shifted_normalized
                                  ? target
                                  : Response([c = cfg.cutoff](double l) { return Complex(l < c ? 1.0 : 0.0); });
  std::vector<std::pair<int, FirCoefficients>> firs;
  for (int K : cfg.fir_orders) firs.emplace_back(K, fir_design_ls(fir_target, K, fir_basis.bounds()).coeffs);

  DynamicsConfig base = cfg.dynamics;
  base.kind = DynamicsKind::random_waypoint;
  if (cfg.density_scaling) base.area = cfg.dynamics.area * cfg.n / 100.0;

  Table table{"fig7_response_error", {"speed", "K", "arma_mean", "arma_std", "fir_mean", "fir_std"}, {}};
  Table static_table{"fig7_static_residual", {"repetition", "K", "arma_error", "design_residual"}, {}};
  const std::size_t filters = armas.size() + firs.size();
  std::vector<double> static_gap(armas.size(), 0.0);

  for (double speed : cfg.speeds) {
    std::vector<std::vector<double>> per_rep(filters);
    for (int rep = 0; rep < cfg.repetitions; ++rep) {
      const auto rep_id = static_cast<std::uint64_t>(rep);
      // The same seed at every speed keeps initial positions and waypoints common.
      DynamicsConfig dc = base;
      dc.vmin = dc.vmax = speed;
      dc.seed = derive_seed(cfg.seed, rep_id, 0);
      GraphDynamics dyn(dc, Graph(cfg.n));
      const std::vector<Graph> graphs = graph_trace(dyn, cfg.rounds);
      const std::vector<Operator> ops = operators_of(graphs, kShiftedNormalized);
      const std::vector<Operator> fops = fir_operators(graphs, ops, fir_basis);

      std::mt19937_64 rng(derive_seed(cfg.seed, rep_id, 1));
      std::uniform_real_distribution<double> unit(0.0, 1.0);
      Signal x(cfg.n);
      for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = unit(rng);

      RunOptions opt;
      opt.rounds = cfg.rounds;
      std::vector<SimulationTrace> traces(armas.size());
      std::vector<bool> ok(armas.size(), true);
      for (std::size_t a = 0; a < armas.size(); ++a) {
        try {
          traces[a] = arma_run(armas[a].second, operator_sequence_view(ops), constant_signal(x), opt);
        } catch (const DivergenceError& err) {
          ok[a] = false;
          res.notes.push_back("speed " + key_number(speed) + " repetition " + std::to_string(rep) +
                              " K=" + std::to_string(armas[a].first) + ": " + err.what());
        }
      }

      std::vector<std::vector<double>> e(filters);
      for (long t = cfg.discard; t < cfg.rounds; ++t) {
        const auto i = static_cast<std::size_t>(t);
        const auto sd = spectral_decompose(ops[i]);
        for (std::size_t a = 0; a < armas.size(); ++a) {
          if (ok[a]) e[a].push_back(response_error(sd, x, traces[a].z[i], target));
        }
        for (std::size_t f = 0; f < firs.size(); ++f) {
          const Signal y = fir_apply_timevarying(firs[f].second, fops, x, i);
          e[armas.size() + f].push_back(response_error(sd, x, y, target));
        }
      }
      for (std::size_t f = 0; f < filters; ++f) per_rep[f].push_back(e[f].empty() ? kNaN : mean_of(e[f]));

      if (speed == 0.0) {
        const auto sd = spectral_decompose(ops.front());
        for (std::size_t a = 0; a < armas.size(); ++a) {
          const ArmaCoefficients& c = armas[a].second;
          const Signal y = spectral_apply(sd, [&](double mu) { return response_static(c, mu); }, x);
          const double residual = response_error(sd, x, y, target);
          const double got = per_rep[a].back();
          static_table.rows.push_back({double(rep), double(armas[a].first), got, residual});
          static_gap[a] = std::max(static_gap[a], std::abs(got - residual));
        }
      }
    }
    const std::size_t rows = std::max(armas.size(), firs.size());
    for (std::size_t r = 0; r < rows; ++r) {
      const int K = r < armas.size() ? armas[r].first : firs[r].first;
      const double am = r < armas.size() ? mean_of(per_rep[r]) : kNaN;
      const double as = r < armas.size() ? std_of(per_rep[r]) : kNaN;
      const double fm = r < firs.size() ? mean_of(per_rep[armas.size() + r]) : kNaN;
      const double fs = r < firs.size() ? std_of(per_rep[armas.size() + r]) : kNaN;
      table.rows.push_back({speed, double(K), am, as, fm, fs});
      const std::string suffix = "_K" + std::to_string(K) + "_v" + key_number(speed);
      if (r < armas.size()) res.summary["arma_mean" + suffix] = am;
      if (r < firs.size()) res.summary["fir_mean" + suffix] = fm;
    }
  }
  for (std::size_t a = 0; a < armas.size(); ++a) {
    res.summary["static_gap_K" + std::to_string(armas[a].first)] = static_gap[a];
  }
  res.summary["divergences"] = static_cast<double>(res.notes.size());
  res.tables = {table, static_table};
  return res;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  ExperimentResult res;
  if (cfg.experiment == "fig1_responses") res = run_fig1(cfg);
  else if (cfg.experiment == "fig2_denoise_convergence") res = run_fig2(cfg);
  else if (cfg.experiment == "interference") res = run_interference(cfg);
  else if (cfg.experiment == "fig5_denoise_tv") res = run_fig5(cfg);
  else res = run_fig7(cfg);
  res.experiment = cfg.experiment;
  res.summary["seed"] = static_cast<double>(cfg.seed);
  res.summary["n"] = cfg.n;
  return res;
}

void emit_plot_data(const ExperimentResult& result, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());

  for (const Table& t : result.tables) {
    const fs::path path = fs::path(dir) / (t.name + ".csv");
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path.string());
    for (std::size_t c = 0; c < t.columns.size(); ++c) out << (c ? "," : "") << t.columns[c];
    out << '\n';
    for (const auto& row : t.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
      out << '\n';
    }
  }
  for (const auto& [name, content] : result.documents) {
    std::ofstream out(fs::path(dir) / name);
    if (!out) throw Error("cannot write " + name);
    out << content << '\n';
  }

  // Values are written through format_number so reruns are byte-identical.
  std::ostringstream js;
  js << "{\n  \"experiment\": \"" << result.experiment << "\",\n  \"summary\": {";
  bool first = true;
  for (const auto& [key, value] : result.summary) {
    const std::string v = format_number(value);
    const bool finite = std::isfinite(value);
    js << (first ? "\n" : ",\n") << "    \"" << key << "\": " << (finite ? v : "\"" + v + "\"");
    first = false;
  }
  js << "\n  },\n  \"notes\": " << nlohmann::json(result.notes).dump() << "\n}\n";
  std::ofstream out(fs::path(dir) / "summary.json");
  if (!out) throw Error("cannot write summary.json");
  out << js.str();
}

}  // namespace armagf
