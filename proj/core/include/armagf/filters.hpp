#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "armagf/fir.hpp"
#include "armagf/graph.hpp"

namespace armagf {

inline constexpr double kDivergenceThreshold = 1e12;

/// One first-order branch: y <- psi L y + phi x.
struct ArmaBranch {
  Complex psi = 0.0;
  Complex phi = 0.0;
};

/// Parallel ARMA_K: K branches sharing input and operator, summed, plus c x.
/// Residue r_k = -phi_k / psi_k and pole p_k = 1 / psi_k.
struct ArmaParallelCoefficients {
  std::vector<ArmaBranch> branches;
  Complex c = 0.0;

  int order() const noexcept { return static_cast<int>(branches.size()); }
  /// Throws PoleError for a branch with psi = 0 (its pole is at infinity).
  std::vector<Complex> poles() const;
  std::vector<Complex> residues() const;
  /// max_k |psi_k| rho; the recursion is stable when this is below 1.
  double stability_factor(double rho) const;
  bool is_stable(double rho) const { return stability_factor(rho) < 1.0; }
};

struct PeriodicStage {
  Complex theta = 0.0;
  Complex psi = 0.0;
  Complex phi = 0.0;
};

/// Periodic ARMA_K: y <- (theta_k I + psi_k L) y + phi_k x with k = t mod K.
struct ArmaPeriodicCoefficients {
  std::vector<PeriodicStage> cycle;
  Complex c = 0.0;

  int period() const noexcept { return static_cast<int>(cycle.size()); }
  /// prod_k (theta_k + psi_k lambda).
  Complex cycle_gain(Complex lambda) const;
  /// |prod_k (theta_k + psi_k rho)|, the cycle gain at the band edge only.
  double stability_product(double rho) const;
  bool is_stable(double rho) const { return stability_product(rho) < 1.0; }
  /// max over lambda in [lo, hi] of |prod_k (theta_k + psi_k lambda)|. Below
  /// one guarantees convergence on every graph with spectrum in the band;
  /// the edge product alone does not.
  double band_gain(double lo, double hi) const;
};

using ArmaCoefficients = std::variant<ArmaParallelCoefficients, ArmaPeriodicCoefficients>;

ArmaParallelCoefficients arma1(Complex psi, Complex phi, Complex c = 0.0);

/// Closed-form response c + sum_k phi_k / (1 - psi_k lambda).
Complex response_static(const ArmaParallelCoefficients& coeffs, Complex lambda);
/// Closed-form periodic response
/// c + sum_k prod_{tau>k}(theta_tau + psi_tau lambda) phi_k / (1 - prod_k(theta_k + psi_k lambda)).
Complex response_static(const ArmaPeriodicCoefficients& coeffs, Complex lambda);
Complex response_static(const ArmaCoefficients& coeffs, Complex lambda);

/// Applies H(lambda_n) to every GFT coefficient of x.
Signal spectral_apply(const SpectralDecomposition& sd, const Response& h, const Signal& x);

/// Recursion state. Parallel filters keep one vector per branch; ARMA_1 and
/// periodic filters keep one. `t` counts completed rounds.
struct FilterState {
  std::vector<Signal> y;
  long t = 0;

  static FilterState zeros(std::size_t branches, Eigen::Index n);
};

/// One ARMA_1 round: y <- psi L y + phi x, returns y + c x.
/// Throws DivergenceError when the state leaves the representable range.
Signal arma1_step(FilterState& state, const Operator& L, const Signal& x, Complex psi, Complex phi,
                  Complex c);
Signal parallel_step(FilterState& state, const Operator& L, const Signal& x,
                     const ArmaParallelCoefficients& coeffs);
/// One periodic round using stage t mod K.
Signal periodic_step(FilterState& state, const Operator& L, const Signal& x,
                     const ArmaPeriodicCoefficients& coeffs);

/// x_t for round t. Pull-based so dynamics generators can feed the filter.
using SignalSource = std::function<Signal(long)>;
/// L_t for round t. The reference must stay valid until the next call.
using OperatorSource = std::function<const Operator&(long)>;

SignalSource constant_signal(Signal x);
SignalSource signal_sequence(std::vector<Signal> xs);
OperatorSource constant_operator(Operator L);
OperatorSource operator_sequence(std::vector<Operator> ops);
/// Shares an existing sequence; `ops` must outlive the source.
OperatorSource operator_sequence_view(const std::vector<Operator>& ops);

struct RunOptions {
  long rounds = 100;
  /// Initial state for every branch; zero when unset.
  std::optional<Signal> y0;
  bool stop_at_steady = false;
  double steady_tolerance = 1e-10;
  int steady_count = 5;
};

/// Outputs z_1 ... z_T. Entry i holds the output of round i + 1.
struct SimulationTrace {
  std::vector<Signal> z;
  std::vector<bool> valid;
  std::vector<std::size_t> messages;
  std::vector<std::size_t> memory;
  /// First round at which the steady-state rule was satisfied.
  std::optional<long> steady_round;
  std::map<std::string, std::string> metadata;

  std::size_t size() const noexcept { return z.size(); }
  /// Last output flagged valid. Throws InvalidArgument on an empty trace.
  const Signal& last_valid() const;
};

SimulationTrace arma1_run(Complex psi, Complex phi, Complex c, const OperatorSource& L,
                          const SignalSource& x, const RunOptions& options);
SimulationTrace parallel_arma_run(const ArmaParallelCoefficients& coeffs, const OperatorSource& L,
                                  const SignalSource& x, const RunOptions& options);
SimulationTrace periodic_arma_run(const ArmaPeriodicCoefficients& coeffs, const OperatorSource& L,
                                  const SignalSource& x, const RunOptions& options);
SimulationTrace arma_run(const ArmaCoefficients& coeffs, const OperatorSource& L,
                         const SignalSource& x, const RunOptions& options);

/// Time-invariant form of one full cycle: y_{t+K} = A y_t + B x.
struct LiftedSystem {
  Eigen::MatrixXcd A;
  Eigen::MatrixXcd B;
};
LiftedSystem lifted_periodic_system(const ArmaPeriodicCoefficients& coeffs, const Operator& L);

/// CSV with columns t,node,z_re,z_im,valid,msgs,mem.
void write_trace_csv(std::ostream& out, const SimulationTrace& trace);

std::string coefficients_to_json(const ArmaCoefficients& coeffs);
ArmaCoefficients coefficients_from_json(const std::string& text);
void write_coefficients_file(const std::string& path, const ArmaCoefficients& coeffs);
ArmaCoefficients read_coefficients_file(const std::string& path);

}  // namespace armagf
