#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "armagf/filters.hpp"

namespace armagf {

/// sum_k phi_k z^-1 / (1 - psi_k lambda z^-1) + c z^-1.
Complex joint_transfer_parallel(const ArmaParallelCoefficients& coeffs, Complex z, double lambda);
/// sum_k prod_{tau>k}(theta_tau + psi_tau lambda) phi_k z^{k-K}
///   / (1 - prod_k(theta_k + psi_k lambda) z^-K) + c z^-1.
Complex joint_transfer_periodic(const ArmaPeriodicCoefficients& coeffs, Complex z, double lambda);
Complex joint_transfer(const ArmaCoefficients& coeffs, Complex z, double lambda);

/// z = exp(j 2 pi f); f = 0.5 is the Nyquist rate.
Complex temporal_point(double f);

struct JointResponseGrid {
  std::vector<double> f;
  std::vector<double> lambda;
  Eigen::MatrixXcd H;  ///< H(i, j) at f[i], lambda[j]

  Eigen::MatrixXd magnitude() const { return H.cwiseAbs(); }
};

JointResponseGrid joint_response_grid(const ArmaCoefficients& coeffs, std::span<const double> f,
                                      std::span<const double> lambda);
/// CSV with columns f,lambda,H_abs,H_re,H_im.
void write_joint_response_csv(std::ostream& out, const JointResponseGrid& grid);

/// max over f <= f_max and lambda of ||H(e^{j2pi f}, lambda)| - |H(1, lambda)||.
double low_frequency_deviation(const ArmaCoefficients& coeffs, double f_max,
                               std::span<const double> lambda, int f_points = 64);

/// Output at round t + 1 for a unit impulse at round 0: phi (psi lambda)^t + c delta[t].
Complex impulse_response_arma1(Complex psi, Complex phi, Complex c, double lambda, long t);

/// blkdiag[L_0 ... L_t] (P kron I) with P the cyclic shift, stored as the
/// operator sequence. Block row i holds L_i applied to slice i - 1 (slice t
/// for i = 0). A single slice reduces to L_0.
class JointLaplacian {
 public:
  explicit JointLaplacian(std::vector<Operator> sequence);

  Eigen::Index num_nodes() const noexcept { return n_; }
  std::size_t num_slices() const noexcept { return seq_.size(); }
  Eigen::Index dimension() const noexcept { return n_ * static_cast<Eigen::Index>(seq_.size()); }
  const std::vector<Operator>& sequence() const noexcept { return seq_; }

  Signal apply(const Signal& s) const;
  /// Dense form; refuses dimensions above 2000.
  Eigen::MatrixXd dense() const;

  /// max_tau || last block of L_tv^tau s - L_t ... L_{t-tau+1} x_{t-tau} ||, with
  /// s the stacked inputs x_0 ... x_t.
  double identity_residual(std::span<const Signal> inputs) const;

  struct Eigendecomposition {
    bool available = false;
    Eigen::VectorXcd eigenvalues;
    Eigen::MatrixXcd eigenvectors;
    double condition = 0.0;  ///< 2-norm condition number of the eigenvector matrix
  };
  /// Attempts a non-symmetric eigendecomposition; reported unavailable when
  /// the solver fails or the eigenvectors are numerically dependent.
  Eigendecomposition eigendecompose(double max_condition = 1e12) const;

 private:
  std::vector<Operator> seq_;
  Eigen::Index n_ = 0;
};

Signal stack_signals(std::span<const Signal> xs);

/// Upper bound on ||z_t1 - z_t2|| / x_max for an ARMA_1 on operators with
/// ||L_t|| <= rho. Needs |psi| rho < 1 and t1 >= t2.
double convergence_distance_bound(Complex psi, Complex phi, Complex c, double rho, double y0_norm,
                                  double x_max, double x_diff_norm, long t1, long t2);

/// log(alpha / eps) with alpha = ||y0|| / x_max + |phi| / (1 - |psi rho|), as
/// the threshold is stated for the second instant.
double settling_threshold(Complex psi, Complex phi, double rho, double y0_norm, double x_max,
                          double eps);
/// Smallest t2 with alpha |psi rho|^t2 <= eps: log(alpha / eps) / -log|psi rho|.
double settling_rounds(Complex psi, Complex phi, double rho, double y0_norm, double x_max,
                       double eps);

}  // namespace armagf
