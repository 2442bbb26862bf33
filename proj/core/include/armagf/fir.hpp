#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "armagf/graph.hpp"

namespace armagf {

/// A graph frequency response H(lambda).
using Response = std::function<Complex(double)>;

/// Polynomial filter h_0 I + h_1 L + ... + h_K L^K.
struct FirCoefficients {
  std::vector<Complex> h;

  int order() const noexcept { return static_cast<int>(h.size()) - 1; }
  Complex response(double lambda) const;
};

struct FirDesign {
  FirCoefficients coeffs;
  double squared_error = 0.0;  ///< sum over the grid of |H - H*|^2
  double rms_error = 0.0;      ///< sqrt(squared_error / grid size)
};

/// Least-squares polynomial fit of `target` on a uniform grid over the bounds.
/// Throws NumericalError when the Vandermonde system is rank deficient.
FirDesign fir_design_ls(const Response& target, int order, const SpectralBounds& bounds,
                        int grid_size = kDefaultGridSize);

/// Same fit on an explicit grid.
FirDesign fir_design_ls(const Response& target, int order, std::span<const double> grid);

/// sum_k h_k L^k x, evaluated with `order` sparse products.
Signal fir_apply_static(const FirCoefficients& fc, const Operator& L, const Signal& x);

/// sum_k h_k L_t L_{t-1} ... L_{t-k+1} x, where laplacians[tau] is L_tau.
/// Needs L_{t-K+1} ... L_t to be present.
Signal fir_apply_timevarying(const FirCoefficients& fc, std::span<const Operator> laplacians,
                             const Signal& x, std::size_t t);

}  // namespace armagf
