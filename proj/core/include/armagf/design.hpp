#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "armagf/filters.hpp"
#include "armagf/fir.hpp"
#include "armagf/polynomial.hpp"

namespace armagf {

/// H(lambda) = (b_0 + ... + b_K lambda^K) / (1 + a_1 lambda + ... + a_K lambda^K).
struct RationalResponse {
  std::vector<Complex> b;
  std::vector<Complex> a;  ///< a[0] == 1

  int order() const noexcept { return static_cast<int>(a.size()) - 1; }
  Complex numerator(Complex lambda) const { return poly_eval(b, lambda); }
  Complex denominator(Complex lambda) const { return poly_eval(a, lambda); }
  /// Throws PoleError where the denominator vanishes.
  Complex operator()(Complex lambda) const;
  /// Checks a_0 == 1, K >= 1, matching lengths and finite values.
  void validate() const;
};

struct ResiduePole {
  Complex r;
  Complex p;
};

/// H(lambda) = c + sum_k r_k / (lambda - p_k).
struct ResiduePoleForm {
  std::vector<ResiduePole> pairs;
  Complex c = 0.0;

  Complex operator()(Complex lambda) const;
};

/// Polynomial regression of degree K_hat, then a denominator from the
/// vanishing high-order coefficients of p_d * H_hat and a numerator from
/// least squares on the grid. K_hat must exceed K.
RationalResponse shanks_fit(const Response& target, int K, int K_hat, std::span<const double> grid);
RationalResponse shanks_fit(const Response& target, int K, const SpectralBounds& bounds,
                            int grid_size = kDefaultGridSize);

/// Partial fractions over the companion-matrix roots of the denominator.
/// Rejects repeated poles and a zero leading denominator coefficient, and
/// verifies the expansion at 20 sample points.
ResiduePoleForm to_residue_pole(const RationalResponse& rr);

/// psi_k = 1 / p_k, phi_k = -r_k / p_k.
ArmaParallelCoefficients parallel_from_residue_pole(const ResiduePoleForm& rp);
/// p_k = 1 / psi_k, r_k = -phi_k / psi_k.
ResiduePoleForm residue_pole_from_parallel(const ArmaParallelCoefficients& coeffs);

/// theta_0 = 0 and theta_k = 1 for k >= 1; psi_k match the denominator roots
/// and phi_k solve the numerator equations.
ArmaPeriodicCoefficients periodic_from_rational(const RationalResponse& rr);

struct StabilityReport {
  bool stable = false;
  double rho = 0.0;
  /// Parallel: |p_k| - rho per branch. Periodic: one entry, 1 - product.
  std::vector<double> margins;
  /// Periodic: |prod_k (theta_k + psi_k rho)|. Parallel: max_k |psi_k| rho.
  double factor = 0.0;
  /// Largest per-round contraction over the whole band. Periodic: max over
  /// lambda of |prod_k (theta_k + psi_k lambda)|, which can exceed `factor`.
  /// Parallel: equal to `factor`.
  double band_factor = 0.0;
};

StabilityReport check_stability(const ArmaParallelCoefficients& coeffs, const SpectralBounds& bounds);
StabilityReport check_stability(const ArmaPeriodicCoefficients& coeffs, const SpectralBounds& bounds);
StabilityReport check_stability(const ArmaCoefficients& coeffs, const SpectralBounds& bounds);

/// Sum over the grid of |H - H*|^2.
double squared_response_error(const Response& fitted, const Response& target,
                              std::span<const double> grid);

enum class Architecture { parallel, periodic };
Architecture parse_architecture(std::string_view name);

struct DesignReport {
  std::string target_id;
  int K = 0;
  int K_hat = 0;
  int grid_size = 0;
  SpectralBounds bounds;
  RationalResponse rational;
  ArmaCoefficients coefficients;
  StabilityReport stability;
  double squared_error = 0.0;  ///< of the realized coefficients on the grid
  double rms_error = 0.0;

  std::string to_json() const;
};

/// Shanks fit plus conversion to the requested architecture.
DesignReport design_arma(const Response& target, int K, const SpectralBounds& bounds,
                         Architecture arch = Architecture::parallel,
                         std::optional<int> K_hat = std::nullopt,
                         int grid_size = kDefaultGridSize, std::string target_id = "custom");

/// Ideal step: 1 for lambda <= cutoff, 0 above.
Response lowpass_step(double cutoff);
/// Ideal step: 1 for lambda >= cutoff, 0 below.
Response highpass_step(double cutoff);
/// Named targets usable from configuration: "lowpass", "highpass", "heat"
/// (exp(-scale * lambda)) and "constant".
Response named_target(const std::string& name, double parameter);

}  // namespace armagf
