// armagf: command-line driver for designing, running and evaluating ARMA
// graph filters and for the experiment campaigns.
//
// Exit codes: 0 success, 1 runtime failure (I/O, divergence, numerics),
// 2 invalid input or configuration.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"

#include "armagf/applications.hpp"
#include "armagf/design.hpp"
#include "armagf/dynamics.hpp"
#include "armagf/experiments.hpp"
#include "armagf/filters.hpp"
#include "armagf/io.hpp"
#include "armagf/temporal.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace armagf;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path prepare_out(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir + ": " + ec.message());
  return fs::path(dir);
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  return out;
}

// Options given on the command line win; the rest may come from a JSON
// object whose keys are the long option names without dashes.
class ConfigBinder {
 public:
  template <class T>
  CLI::Option* add(CLI::App* app, const std::string& key, T& field, const std::string& help) {
    std::string flag = "--" + key;
    std::replace(flag.begin(), flag.end(), '_', '-');
    CLI::Option* opt = app->add_option(flag, field, help)->capture_default_str();
    setters_[key] = [opt, &field](const json& v) {
      if (opt->count() == 0) field = v.get<T>();
    };
    return opt;
  }

  void ignore(const std::string& key) { setters_[key] = [](const json&) {}; }

  void apply(const std::string& path) const {
    if (path.empty()) return;
    json j;
    try {
      j = json::parse(slurp(path));
    } catch (const json::exception& e) {
      throw InvalidArgument("config " + path + " is not valid JSON: " + e.what());
    }
    if (!j.is_object()) throw InvalidArgument("config " + path + " must hold a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
      const auto s = setters_.find(it.key());
      if (s == setters_.end()) throw InvalidArgument("unknown config key '" + it.key() + "'");
      try {
        s->second(it.value());
      } catch (const json::exception& e) {
        throw InvalidArgument("bad value for '" + it.key() + "': " + e.what());
      }
    }
  }

 private:
  std::map<std::string, std::function<void(const json&)>> setters_;
};

struct Common {
  std::string config;
  std::uint64_t seed = 1;
  int n = 100;
  std::string out = "out";

  void bind(CLI::App* app, ConfigBinder& b) {
    app->add_option("--config", config, "JSON file with option values");
    b.add(app, "seed", seed, "random seed");
    b.add(app, "n", n, "node count for generated graphs")->check(CLI::Range(2, 100000));
    b.add(app, "out", out, "output directory");
  }
};

LaplacianVariant make_variant(const std::string& name, double l) {
  LaplacianVariant v{parse_laplacian_kind(name), std::nullopt};
  if (l > 0.0) v.l = l;
  return v;
}

Graph load_graph(const std::string& file, int n, std::uint64_t seed) {
  if (!file.empty()) return read_edge_list_file(file);
  return random_geometric_graph(n, default_connection_radius(), seed).graph;
}

Signal load_signal(const std::string& file, Eigen::Index n, std::uint64_t seed) {
  if (!file.empty()) {
    Signal x = read_signal_file(file);
    if (x.size() != n) {
      throw DimensionError("signal has " + std::to_string(x.size()) + " entries for " + std::to_string(n) +
                           " nodes");
    }
    return x;
  }
  std::mt19937_64 rng(derive_seed(seed, 7));
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Signal x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = unit(rng);
  return x;
}

void write_signal_to(const fs::path& path, const Signal& x) {
  auto out = open_out(path);
  write_signal(out, x);
}

void write_json_to(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

// Target in the unshifted frequency, re-expressed on the variant's basis.
Response shifted_target(const Response& target, double shift) {
  if (shift == 0.0) return target;
  return [target, shift](double mu) { return target(mu + shift); };
}

double variant_shift(const LaplacianVariant& v) {
  switch (v.kind) {
    case LaplacianKind::shifted_normalized: return 1.0;
    case LaplacianKind::shifted_discrete: return v.l.value_or(0.0) / 2.0;
    default: return 0.0;
  }
}

SpectralRational parse_spectral(const json& j) {
  SpectralRational s;
  auto coeffs = [](const json& a) {
    Polynomial p;
    for (double v : a.get<std::vector<double>>()) p.emplace_back(v);
    return p;
  };
  if (j.contains("num")) s.num = coeffs(j["num"]);
  if (j.contains("den")) s.den = coeffs(j["den"]);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "num" && it.key() != "den") throw InvalidArgument("spectrum keys are 'num' and 'den'");
  }
  return s;
}

// ------------------------------------------------------------------ design

struct DesignCmd {
  Common common;
  ConfigBinder binder;
  std::string target = "lowpass";
  double param = 0.5;
  int order = 3;
  int k_hat = 0;
  std::string arch = "parallel";
  std::string variant = "shifted_normalized";
  double l = 0.0;
  int grid = kDefaultGridSize;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("design", "Fit an ARMA filter to a target response");
    common.bind(sub, binder);
    binder.add(sub, "target", target, "lowpass | highpass | heat | constant");
    binder.add(sub, "param", param, "cutoff, heat scale or constant, in the unshifted frequency");
    binder.add(sub, "order", order, "filter order K")->check(CLI::PositiveNumber);
    binder.add(sub, "k_hat", k_hat, "numerator order (0 means K)")->check(CLI::NonNegativeNumber);
    binder.add(sub, "arch", arch, "parallel | periodic");
    binder.add(sub, "variant", variant, "Laplacian basis the recursion runs on");
    binder.add(sub, "l", l, "degree bound for discrete variants");
    binder.add(sub, "grid", grid, "design grid size")->check(CLI::Range(2, 1000000));
    sub->callback([this] { run(); });
  }

  void run() {
    binder.apply(common.config);
    const LaplacianVariant v = make_variant(variant, l);
    const SpectralBounds bounds = v.bounds();
    const Response h = shifted_target(named_target(target, param), variant_shift(v));
    const DesignReport rep = design_arma(h, order, bounds, parse_architecture(arch),
                                         k_hat > 0 ? std::optional<int>(k_hat) : std::nullopt, grid, target);
    const fs::path dir = prepare_out(common.out);
    open_out(dir / "design.json") << rep.to_json() << '\n';
    write_coefficients_file((dir / "coefficients.json").string(), rep.coefficients);
    std::cout << "K = " << rep.K << ", RMS error " << format_number(rep.rms_error) << ", "
              << (rep.stability.stable ? "stable" : "UNSTABLE") << " (factor "
              << format_number(rep.stability.factor) << ")\n";
    if (rep.stability.band_factor >= 1.0) {
      std::cout << "warning: cycle gain reaches " << format_number(rep.stability.band_factor)
                << " inside the band; the recursion can diverge on some graphs\n";
    }
    std::cout << "wrote " << (dir / "design.json").string() << " and " << (dir / "coefficients.json").string()
              << '\n';
  }
};

// --------------------------------------------------------------------- run

struct RunCmd {
  Common common;
  ConfigBinder binder;
  std::string coefficients;
  std::string graph_file;
  std::string signal_file;
  std::string variant = "shifted_normalized";
  double l = 0.0;
  long rounds = 200;
  std::string dynamics = "static";
  double p = 0.05;
  double speed = 1.0;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("run", "Run a designed filter on a graph");
    common.bind(sub, binder);
    binder.add(sub, "coefficients", coefficients, "coefficient JSON written by 'design'")->required();
    binder.add(sub, "graph_file", graph_file, "edge list; a random geometric graph when empty");
    binder.add(sub, "signal_file", signal_file, "input signal; uniform random when empty");
    binder.add(sub, "variant", variant, "Laplacian basis");
    binder.add(sub, "l", l, "degree bound for discrete variants");
    binder.add(sub, "rounds", rounds, "synchronous rounds")->check(CLI::PositiveNumber);
    binder.add(sub, "dynamics", dynamics, "static | edge_failure | random_waypoint");
    binder.add(sub, "p", p, "edge failure probability");
    binder.add(sub, "speed", speed, "waypoint speed in m/s");
    sub->callback([this] { run(); });
  }

  void run() {
    binder.apply(common.config);
    const ArmaCoefficients coeffs = read_coefficients_file(coefficients);
    DynamicsConfig dc;
    dc.kind = parse_dynamics_kind(dynamics);
    dc.p = p;
    dc.vmin = dc.vmax = speed;
    dc.seed = derive_seed(common.seed, 3);
    dc.validate();

    Graph g = dc.kind == DynamicsKind::random_waypoint ? Graph(common.n)
                                                       : load_graph(graph_file, common.n, common.seed);
    if (dc.kind == DynamicsKind::random_waypoint && !graph_file.empty()) {
      throw InvalidArgument("random_waypoint builds its own graphs; drop --graph-file");
    }
    const LaplacianVariant v = make_variant(variant, l);
    // Discrete variants fix l from the first graph so every round shares it.
    const LaplacianVariant resolved = v.is_discrete() && !v.l ? v.resolved(g) : v;
    const Signal x = load_signal(signal_file, g.num_nodes(), common.seed);

    GraphDynamics dyn(dc, g);
    Operator current;
    const OperatorSource ops = [&](long) -> const Operator& {
      current = build_laplacian(dyn.next(), resolved);
      return current;
    };
    RunOptions opt;
    opt.rounds = rounds;
    const SimulationTrace trace = arma_run(coeffs, ops, constant_signal(x), opt);

    const fs::path dir = prepare_out(common.out);
    {
      auto out = open_out(dir / "trace.csv");
      write_trace_csv(out, trace);
    }
    write_signal_to(dir / "output.txt", trace.last_valid());
    std::cout << "ran " << trace.size() << " rounds on " << g.num_nodes() << " nodes; wrote "
              << (dir / "trace.csv").string() << '\n';
  }
};

// ----------------------------------------------------------------- denoise

struct DenoiseCmd {
  Common common;
  ConfigBinder binder;
  std::string task = "denoise";
  double w = 0.5;
  int order = 1;
  std::string variant = "shifted_normalized";
  double l = 0.0;
  std::string signal_file;
  std::string graph_file;
  long rounds = 300;
  std::string sigma_x_text;
  std::string sigma_n_text;
  json sigma_x = json::object(), sigma_n = json::object();

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("denoise", "Tikhonov or Wiener denoising with an ARMA filter");
    common.bind(sub, binder);
    binder.add(sub, "task", task, "denoise | wiener");
    binder.add(sub, "w", w, "Tikhonov weight")->check(CLI::PositiveNumber);
    binder.add(sub, "K", order, "regularizer power (1 or 2)")->check(CLI::Range(1, 2));
    binder.add(sub, "variant", variant, "Laplacian basis the recursion runs on");
    binder.add(sub, "l", l, "degree bound for discrete variants");
    binder.add(sub, "signal_file", signal_file, "noisy signal; random when empty");
    binder.add(sub, "graph_file", graph_file, "edge list; a random geometric graph when empty");
    binder.add(sub, "rounds", rounds, "synchronous rounds")->check(CLI::PositiveNumber);
    sub->add_option("--sigma-x", sigma_x_text, "Wiener signal spectrum as JSON {\"num\": [...], \"den\": [...]}");
    sub->add_option("--sigma-n", sigma_n_text, "Wiener noise spectrum, same form");
    binder.ignore("sigma_x");
    binder.ignore("sigma_n");
    sub->callback([this] { run(); });
  }

  void load_spectra() {
    if (!common.config.empty()) {
      const json j = json::parse(slurp(common.config));
      if (j.contains("sigma_x") && sigma_x_text.empty()) sigma_x = j["sigma_x"];
      if (j.contains("sigma_n") && sigma_n_text.empty()) sigma_n = j["sigma_n"];
    }
    try {
      if (!sigma_x_text.empty()) sigma_x = json::parse(sigma_x_text);
      if (!sigma_n_text.empty()) sigma_n = json::parse(sigma_n_text);
    } catch (const json::exception& e) {
      throw InvalidArgument(std::string("spectrum is not valid JSON: ") + e.what());
    }
  }

  void run() {
    binder.apply(common.config);
    if (task != "denoise" && task != "wiener") throw InvalidArgument("task must be denoise or wiener");
    const Graph g = load_graph(graph_file, common.n, common.seed);
    const LaplacianVariant v = make_variant(variant, l).resolved(g);
    const Signal t = load_signal(signal_file, g.num_nodes(), common.seed);

    FilterDesign design;
    Signal reference;
    if (task == "denoise") {
      design = tikhonov_design(w, order, v);
      reference = tikhonov_direct(g, DenoiseProblem{t, w, order, v.unshifted()});
    } else {
      load_spectra();
      WienerProblem prob{parse_spectral(sigma_x), parse_spectral(sigma_n), v};
      design = wiener_design(prob);
      const auto sd = spectral_decompose(build_laplacian(g, v.unshifted()));
      reference = spectral_apply(sd, [&](double lam) { return wiener_response(prob, lam); }, t);
    }
    RunOptions opt;
    opt.rounds = rounds;
    const SimulationTrace trace =
        parallel_arma_run(design.coeffs, constant_operator(build_laplacian(g, v)), constant_signal(t), opt);
    const double err = filtering_error(trace.z.back(), reference);

    const fs::path dir = prepare_out(common.out);
    write_signal_to(dir / "denoised.txt", trace.z.back());
    write_signal_to(dir / "direct.txt", reference);
    write_json_to(dir / "summary.json", json{{"task", task},
                                             {"w", w},
                                             {"K", order},
                                             {"variant", std::string(to_string(v.kind))},
                                             {"rounds", rounds},
                                             {"stable", design.stability.stable},
                                             {"filtering_error", err}});
    std::cout << task << ": filtering error against the direct solution " << format_number(err) << " after "
              << rounds << " rounds (" << (design.stability.stable ? "stable" : "UNSTABLE") << ")\n";
  }
};

// ------------------------------------------------------------- interpolate

struct InterpolateCmd {
  Common common;
  ConfigBinder binder;
  double w = 0.1;
  std::string variant = "normalized";
  std::string signal_file;
  std::string mask_file;
  std::string graph_file;
  double observed_fraction = 0.5;
  long max_rounds = 20000;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("interpolate", "Fill unobserved nodes with an ARMA_1 recursion");
    common.bind(sub, binder);
    binder.add(sub, "w", w, "regularization weight")->check(CLI::PositiveNumber);
    binder.add(sub, "variant", variant, "unshifted Laplacian of the objective");
    binder.add(sub, "signal_file", signal_file, "signal with observed values; random when empty");
    binder.add(sub, "mask_file", mask_file, "one value per node, nonzero marks observed");
    binder.add(sub, "graph_file", graph_file, "edge list; a random geometric graph when empty");
    binder.add(sub, "observed", observed_fraction, "observed fraction when no mask is given")
        ->check(CLI::Range(0.0, 1.0));
    binder.add(sub, "max_rounds", max_rounds, "round cap")->check(CLI::PositiveNumber);
    sub->callback([this] { run(); });
  }

  void run() {
    binder.apply(common.config);
    const Graph g = load_graph(graph_file, common.n, common.seed);
    InterpolationProblem prob;
    prob.w = w;
    prob.variant = make_variant(variant, 0.0).resolved(g);
    const Signal x = load_signal(signal_file, g.num_nodes(), common.seed);
    prob.observed.assign(static_cast<std::size_t>(g.num_nodes()), false);
    if (!mask_file.empty()) {
      const Signal m = read_signal_file(mask_file);
      if (m.size() != g.num_nodes()) throw DimensionError("mask length does not match the graph");
      for (Eigen::Index i = 0; i < m.size(); ++i) prob.observed[static_cast<std::size_t>(i)] = m[i] != Complex(0.0);
    } else {
      std::mt19937_64 rng(derive_seed(common.seed, 8));
      std::bernoulli_distribution keep(observed_fraction);
      for (auto&& o : prob.observed) o = keep(rng);
    }
    prob.t = Signal::Zero(g.num_nodes());
    for (Eigen::Index i = 0; i < x.size(); ++i)
      if (prob.observed[static_cast<std::size_t>(i)]) prob.t[i] = x[i];

    const InterpolationResult res = interpolate(g, prob, max_rounds);
    const Signal direct = interpolate_direct(g, prob);
    const double gap = filtering_error(res.x, direct);
    const fs::path dir = prepare_out(common.out);
    write_signal_to(dir / "interpolated.txt", res.x);
    write_json_to(dir / "summary.json", json{{"w", w},
                                             {"spectral_radius", res.rho},
                                             {"rounds", res.trace.size()},
                                             {"gap_to_direct", gap}});
    std::cout << "interpolated in " << res.trace.size() << " rounds (spectral radius "
              << format_number(res.rho) << "), gap to the direct solve " << format_number(gap) << '\n';
  }
};

// ---------------------------------------------------------- joint-response

struct JointCmd {
  Common common;
  ConfigBinder binder;
  std::string coefficients;
  int f_points = 65;
  int lambda_points = 101;
  double lambda_min = -1.0;
  double lambda_max = 1.0;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("joint-response", "Tabulate the joint graph-temporal response");
    common.bind(sub, binder);
    binder.add(sub, "coefficients", coefficients, "coefficient JSON written by 'design'")->required();
    binder.add(sub, "f_points", f_points, "temporal frequencies in [0, 0.5]")->check(CLI::Range(1, 100000));
    binder.add(sub, "lambda_points", lambda_points, "graph frequencies")->check(CLI::Range(1, 100000));
    binder.add(sub, "lambda_min", lambda_min, "lowest graph frequency");
    binder.add(sub, "lambda_max", lambda_max, "highest graph frequency");
    sub->callback([this] { run(); });
  }

  void run() {
    binder.apply(common.config);
    if (!(lambda_min <= lambda_max)) throw InvalidArgument("need lambda_min <= lambda_max");
    const ArmaCoefficients coeffs = read_coefficients_file(coefficients);
    const auto f = uniform_grid(0.0, 0.5, f_points);
    const auto lam = uniform_grid(lambda_min, lambda_max, lambda_points);
    const JointResponseGrid grid = joint_response_grid(coeffs, f, lam);
    const fs::path dir = prepare_out(common.out);
    auto out = open_out(dir / "joint_response.csv");
    write_joint_response_csv(out, grid);
    std::cout << "wrote " << f.size() * lam.size() << " points to " << (dir / "joint_response.csv").string()
              << '\n';
  }
};

// -------------------------------------------------------------- experiment

struct ExperimentCmd {
  std::string id;
  std::string config;
  std::uint64_t seed = 0;
  int n = 0;
  std::string out;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* n_opt = nullptr;
  CLI::Option* out_opt = nullptr;

  void attach(CLI::App& app) {
    auto* sub = app.add_subcommand("experiment", "Run an experiment campaign and write plot data");
    sub->add_option("id", id,
                    "fig1_responses | fig2_denoise_convergence | interference | fig5_denoise_tv | "
                    "fig7_lowpass_mobility");
    sub->add_option("--config", config, "JSON with ExperimentConfig keys");
    seed_opt = sub->add_option("--seed", seed, "campaign seed");
    n_opt = sub->add_option("--n", n, "node count")->check(CLI::Range(2, 100000));
    out_opt = sub->add_option("--out", out, "output directory");
    sub->callback([this] { run(); });
  }

  void run() {
    ExperimentConfig cfg;
    if (!config.empty()) {
      cfg = ExperimentConfig::from_json(slurp(config));
      if (!id.empty() && id != cfg.experiment) {
        throw InvalidArgument("experiment '" + id + "' does not match config experiment '" + cfg.experiment + "'");
      }
    } else if (!id.empty()) {
      cfg = ExperimentConfig::defaults(id);
    } else {
      throw InvalidArgument("give an experiment id or a --config naming one");
    }
    if (seed_opt->count()) cfg.seed = seed;
    if (n_opt->count()) cfg.n = n;
    if (out_opt->count()) cfg.output_dir = out;
    cfg.validate();

    const ExperimentResult res = run_experiment(cfg);
    emit_plot_data(res, cfg.output_dir);
    std::cout << res.experiment << " (seed " << cfg.seed << ", n " << cfg.n << ") -> " << cfg.output_dir << '\n';
    for (const auto& [key, value] : res.summary) std::cout << "  " << key << " = " << format_number(value) << '\n';
    for (const auto& note : res.notes) std::cout << "  note: " << note << '\n';
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ARMA graph filters: design, simulation and experiments"};
  app.require_subcommand(1);
  DesignCmd design;
  RunCmd run;
  DenoiseCmd denoise;
  InterpolateCmd interp;
  JointCmd joint;
  ExperimentCmd experiment;
  design.attach(app);
  run.attach(app);
  denoise.attach(app);
  interp.attach(app);
  joint.attach(app);
  experiment.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
