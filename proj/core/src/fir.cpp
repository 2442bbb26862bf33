#include "armagf/fir.hpp"

#include <cmath>
#include <string>

namespace armagf {

Complex FirCoefficients::response(double lambda) const {
  Complex acc = 0.0;
  for (auto it = h.rbegin(); it != h.rend(); ++it) acc = acc * lambda + *it;
  return acc;
}

FirDesign fir_design_ls(const Response& target, int order, const SpectralBounds& bounds,
                        int grid_size) {
  const auto grid = uniform_grid(bounds.lambda_min, bounds.lambda_max, grid_size);
  return fir_design_ls(target, order, grid);
}

FirDesign fir_design_ls(const Response& target, int order, std::span<const double> grid) {
  if (order < 0) throw InvalidArgument("FIR order must be non-negative");
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (m < order + 1) throw InvalidArgument("grid needs at least K+1 points");

  Eigen::MatrixXd V(m, order + 1);
  Eigen::VectorXcd rhs(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double lambda = grid[static_cast<std::size_t>(i)];
    double p = 1.0;
    for (int k = 0; k <= order; ++k, p *= lambda) V(i, k) = p;
    rhs[i] = target(lambda);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(V);
  if (qr.rank() < order + 1) {
    throw NumericalError("FIR least-squares system is rank deficient (rank " +
                         std::to_string(qr.rank()) + " < " + std::to_string(order + 1) + ")");
  }
  const Eigen::VectorXcd h = qr.solve(rhs.real()).cast<Complex>() +
                             Complex(0.0, 1.0) * qr.solve(rhs.imag()).cast<Complex>();

  FirDesign design;
  design.coeffs.h.assign(h.data(), h.data() + h.size());
  const Eigen::VectorXcd residual = V.cast<Complex>() * h - rhs;
  design.squared_error = residual.squaredNorm();
  design.rms_error = std::sqrt(design.squared_error / static_cast<double>(m));
  return design;
}

Signal fir_apply_static(const FirCoefficients& fc, const Operator& L, const Signal& x) {
  if (L.rows() != x.size() || L.cols() != x.size()) {
    throw DimensionError("fir_apply_static: operator and signal sizes differ");
  }
  if (fc.h.empty()) throw InvalidArgument("FIR filter needs at least one coefficient");
  // Horner: h_0 x + L (h_1 x + L (h_2 x + ...)).
  Signal acc = fc.h.back() * x;
  for (int k = fc.order() - 1; k >= 0; --k) {
    Signal next = L * acc;
    next += fc.h[static_cast<std::size_t>(k)] * x;
    acc.swap(next);
  }
  return acc;
}

Signal fir_apply_timevarying(const FirCoefficients& fc, std::span<const Operator> laplacians,
                             const Signal& x, std::size_t t) {
  if (fc.h.empty()) throw InvalidArgument("FIR filter needs at least one coefficient");
  const auto order = static_cast<std::size_t>(fc.order());
  if (t >= laplacians.size() || t + 1 < order) {
    throw InvalidArgument("fir_apply_timevarying: insufficient operator history for round " +
                          std::to_string(t));
  }
  for (std::size_t k = 0; k < order; ++k) {
    const Operator& L = laplacians[t - k];
    if (L.rows() != x.size() || L.cols() != x.size()) {
      throw DimensionError("fir_apply_timevarying: operator and signal sizes differ");
    }
  }
  // h_0 x + L_t (h_1 x + L_{t-1} (h_2 x + ...)).
  Signal acc = fc.h.back() * x;
  for (std::size_t k = order; k >= 1; --k) {
    Signal next = laplacians[t - k + 1] * acc;
    next += fc.h[k - 1] * x;
    acc.swap(next);
  }
  return acc;
}

}  // namespace armagf
