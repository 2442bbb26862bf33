#pragma once

#include <cstdint>
#include <vector>

#include "armagf/design.hpp"
#include "armagf/filters.hpp"
#include "armagf/graph.hpp"
#include "armagf/polynomial.hpp"

namespace armagf {

/// Parallel coefficients together with their stability verdict.
struct FilterDesign {
  ArmaParallelCoefficients coeffs;
  StabilityReport stability;
};

/// min_x ||x - t||^2 + w x^T L^K x with L the unshifted Laplacian of `variant`.
struct DenoiseProblem {
  Signal t;
  double w = 1.0;
  int K = 1;
  LaplacianVariant variant;
};

/// H(lambda) = 1 / (1 + w lambda^K) realized as a parallel ARMA_K on the basis
/// of `variant`. For shifted variants the response is rewritten in the shifted
/// variable mu = lambda - shift. Discrete variants need `variant.l` set.
FilterDesign tikhonov_design(double w, int K, const LaplacianVariant& variant);

/// Solves (I + w L^K) x = t directly. w = 0 returns t.
Signal tikhonov_direct(const Graph& g, const DenoiseProblem& prob);

/// Ratio of polynomials in the unshifted graph frequency.
struct SpectralRational {
  Polynomial num{Complex(1.0)};
  Polynomial den{Complex(1.0)};

  Complex operator()(Complex lambda) const;
};

/// Signal and noise spectral densities sigma_x(lambda), sigma_n(lambda).
struct WienerProblem {
  SpectralRational sigma_x;
  SpectralRational sigma_n;
  LaplacianVariant variant;
};

/// H = sigma_x / (sigma_x + sigma_n) after cancelling common factors, in
/// residue-pole form on the basis of `variant`. Throws PoleError when a pole
/// falls inside the spectral band.
FilterDesign wiener_design(const WienerProblem& prob);
/// The same ratio evaluated directly in the unshifted frequency.
Complex wiener_response(const WienerProblem& prob, double lambda);

/// Mean squared error of `filter` (a response in the unshifted frequency of
/// `sd`) over Gaussian draws x ~ sigma_x, n ~ sigma_n in the eigenbasis of `sd`.
double denoise_mse_monte_carlo(const SpectralDecomposition& sd, const Response& filter,
                               const Response& sigma_x, const Response& sigma_n, int draws = 200,
                               std::uint64_t seed = 1);

/// Observed entries of `t` on the nodes where `observed` is set.
struct InterpolationProblem {
  std::vector<bool> observed;
  Signal t;
  double w = 0.1;
  LaplacianVariant variant{LaplacianKind::normalized, std::nullopt};
};

/// L_hat = S - I + w L.
Operator interpolation_operator(const Graph& g, const InterpolationProblem& prob);

struct InterpolationResult {
  Signal x;
  double rho = 0.0;  ///< spectral radius of L_hat
  SimulationTrace trace;
};

/// ARMA_1 with psi = -1, phi = 1 on L_hat, whose limit is (S + w L)^{-1} t.
/// Requires the spectral radius of L_hat to be below 1.
InterpolationResult interpolate(const Graph& g, const InterpolationProblem& prob,
                                long max_rounds = 20000, double tolerance = 1e-12);
/// Direct solve of (S + w L) x = t.
Signal interpolate_direct(const Graph& g, const InterpolationProblem& prob);

}  // namespace armagf
