#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "armagf/dynamics.hpp"
#include "armagf/graph.hpp"

namespace armagf {

/// Experiment identifiers: fig1_responses, fig2_denoise_convergence,
/// interference, fig5_denoise_tv, fig7_lowpass_mobility.
struct ExperimentConfig {
  std::string experiment;
  int n = 100;
  /// Connection radius on the unit square; 15% of the diagonal when unset.
  std::optional<double> radius;
  /// Edge list replacing the random geometric graph.
  std::string graph_file;
  DynamicsConfig dynamics;
  std::vector<int> orders;
  std::vector<double> weights;
  std::vector<double> speeds;
  std::vector<int> fir_orders;
  /// Step cutoff in the normalized Laplacian frequency.
  double cutoff = 0.5;
  long rounds = 100;
  long discard = 0;
  int repetitions = 1;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  /// Mobility: scale the area with n so the node density matches 100 nodes
  /// in the configured area.
  bool density_scaling = true;
  /// Operator the time-varying FIR baselines are designed for and run on.
  LaplacianKind fir_basis = LaplacianKind::normalized;

  /// Full-scale defaults for `id`. Throws InvalidArgument for unknown ids.
  static ExperimentConfig defaults(const std::string& id);
  /// Defaults for the "experiment" key, overridden by the remaining keys.
  static ExperimentConfig from_json(const std::string& text);
  void validate() const;
};

/// Column-oriented numeric table written as CSV.
struct Table {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

struct ExperimentResult {
  std::string experiment;
  std::map<std::string, double> summary;
  std::vector<Table> tables;
  /// Extra files (name -> content), e.g. designed coefficient dumps.
  std::map<std::string, std::string> documents;
  /// Divergence events and other per-repetition remarks.
  std::vector<std::string> notes;
};

ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes every table as <name>.csv, every document, and summary.json into
/// `dir`. Numbers use 12 significant digits.
void emit_plot_data(const ExperimentResult& result, const std::string& dir);
std::string format_number(double v);

/// ||z - x|| / ||x||.
double filtering_error(const Signal& z, const Signal& reference);

/// ||g - g*|| / ||g*|| with g_n = y_n / x_n in the GFT domain of `sd`; bins
/// with |x_n| <= threshold * ||x|| are skipped. NaN when no bin qualifies or
/// g* vanishes on all of them.
double response_error(const SpectralDecomposition& sd, const Signal& x, const Signal& y,
                      const std::function<Complex(double)>& target, double threshold = 1e-6);

/// Deterministic child seed.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0);

/// Random geometric graph or edge-list graph described by `cfg`.
Graph experiment_graph(const ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace armagf
