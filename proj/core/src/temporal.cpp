#include "armagf/temporal.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace armagf {

namespace {

void require_nonzero(Complex z) {
  if (z == Complex(0.0)) throw InvalidArgument("joint transfer needs z != 0");
}

void check_joint_pole(Complex den, Complex lambda_term, Complex z) {
  if (std::abs(den) <= 1e-13 * std::max(1.0, std::abs(lambda_term))) {
    throw PoleError("joint transfer evaluated at a pole", z);
  }
}

}  // namespace

Complex joint_transfer_parallel(const ArmaParallelCoefficients& coeffs, Complex z, double lambda) {
  require_nonzero(z);
  const Complex zi = 1.0 / z;
  Complex h = coeffs.c * zi;
  for (const auto& b : coeffs.branches) {
    if (b.phi == Complex(0.0)) continue;
    const Complex den = 1.0 - b.psi * lambda * zi;
    check_joint_pole(den, b.psi * lambda * zi, z);
    h += b.phi * zi / den;
  }
  return h;
}

Complex joint_transfer_periodic(const ArmaPeriodicCoefficients& coeffs, Complex z, double lambda) {
  require_nonzero(z);
  const int K = coeffs.period();
  const Complex zi = 1.0 / z;
  if (K == 0) return coeffs.c * zi;
  Complex numerator = 0.0;
  Complex tail = 1.0;
  for (int k = K - 1; k >= 0; --k) {
    const auto& s = coeffs.cycle[static_cast<std::size_t>(k)];
    numerator += tail * s.phi * std::pow(z, k - K);
    tail *= s.theta + s.psi * lambda;
  }
  const Complex loop = tail * std::pow(zi, K);
  if (numerator == Complex(0.0)) return coeffs.c * zi;
  const Complex den = 1.0 - loop;
  check_joint_pole(den, loop, z);
  return numerator / den + coeffs.c * zi;
}

Complex joint_transfer(const ArmaCoefficients& coeffs, Complex z, double lambda) {
  if (const auto* p = std::get_if<ArmaParallelCoefficients>(&coeffs)) {
    return joint_transfer_parallel(*p, z, lambda);
  }
  return joint_transfer_periodic(std::get<ArmaPeriodicCoefficients>(coeffs), z, lambda);
}

Complex temporal_point(double f) { return std::polar(1.0, 2.0 * std::numbers::pi * f); }

JointResponseGrid joint_response_grid(const ArmaCoefficients& coeffs, std::span<const double> f,
                                      std::span<const double> lambda) {
  JointResponseGrid g{{f.begin(), f.end()}, {lambda.begin(), lambda.end()},
                      Eigen::MatrixXcd(static_cast<Eigen::Index>(f.size()),
                                       static_cast<Eigen::Index>(lambda.size()))};
  for (std::size_t i = 0; i < f.size(); ++i) {
    const Complex z = f[i] == 0.0 ? Complex(1.0) : temporal_point(f[i]);
    for (std::size_t j = 0; j < lambda.size(); ++j) {
      g.H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = joint_transfer(coeffs, z, lambda[j]);
    }
  }
  return g;
}

void write_joint_response_csv(std::ostream& out, const JointResponseGrid& grid) {
  out << "f,lambda,H_abs,H_re,H_im\n";
  out.precision(12);
  for (std::size_t i = 0; i < grid.f.size(); ++i) {
    for (std::size_t j = 0; j < grid.lambda.size(); ++j) {
      const Complex h = grid.H(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
      out << grid.f[i] << ',' << grid.lambda[j] << ',' << std::abs(h) << ',' << h.real() << ','
          << h.imag() << '\n';
    }
  }
}

double low_frequency_deviation(const ArmaCoefficients& coeffs, double f_max,
                               std::span<const double> lambda, int f_points) {
  const auto f = uniform_grid(0.0, f_max, f_points);
  const auto grid = joint_response_grid(coeffs, f, lambda);
  const Eigen::MatrixXd mag = grid.magnitude();
  double worst = 0.0;
  for (Eigen::Index i = 0; i < mag.rows(); ++i) {
    worst = std::max(worst, (mag.row(i) - mag.row(0)).cwiseAbs().maxCoeff());
  }
  return worst;
}

Complex impulse_response_arma1(Complex psi, Complex phi, Complex c, double lambda, long t) {
  if (t < 0) throw InvalidArgument("impulse response index must be non-negative");
  Complex h = phi * std::pow(psi * lambda, static_cast<double>(t));
  if (t == 0) h = phi + c;
  return h;
}

JointLaplacian::JointLaplacian(std::vector<Operator> sequence) : seq_(std::move(sequence)) {
  if (seq_.empty()) throw InvalidArgument("joint Laplacian needs at least one operator");
  n_ = seq_.front().rows();
  for (const Operator& L : seq_) {
    if (L.rows() != n_ || L.cols() != n_) throw DimensionError("operators in the sequence differ in size");
  }
}

Signal JointLaplacian::apply(const Signal& s) const {
  if (s.size() != dimension()) throw DimensionError("joint signal has the wrong length");
  const auto slices = static_cast<Eigen::Index>(seq_.size());
  Signal out(s.size());
  for (Eigen::Index i = 0; i < slices; ++i) {
    const Eigen::Index src = (i + slices - 1) % slices;
    out.segment(i * n_, n_) = seq_[static_cast<std::size_t>(i)] * s.segment(src * n_, n_);
  }
  return out;
}

Eigen::MatrixXd JointLaplacian::dense() const {
  if (dimension() > 2000) throw InvalidArgument("joint Laplacian too large to densify");
  const auto slices = static_cast<Eigen::Index>(seq_.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(dimension(), dimension());
  for (Eigen::Index i = 0; i < slices; ++i) {
    const Eigen::Index src = (i + slices - 1) % slices;
    M.block(i * n_, src * n_, n_, n_) = Eigen::MatrixXd(seq_[static_cast<std::size_t>(i)]);
  }
  return M;
}

Signal stack_signals(std::span<const Signal> xs) {
  if (xs.empty()) return Signal();
  const Eigen::Index n = xs.front().size();
  Signal s(n * static_cast<Eigen::Index>(xs.size()));
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (xs[i].size() != n) throw DimensionError("signals in the sequence differ in length");
    s.segment(static_cast<Eigen::Index>(i) * n, n) = xs[i];
  }
  return s;
}

double JointLaplacian::identity_residual(std::span<const Signal> inputs) const {
  if (inputs.size() != seq_.size()) throw DimensionError("need one input per slice");
  const long t = static_cast<long>(seq_.size()) - 1;
  Signal power = stack_signals(inputs);
  double worst = 0.0;
  for (long tau = 0; tau <= t; ++tau) {
    Signal direct = inputs[static_cast<std::size_t>(t - tau)];
    for (long k = t - tau + 1; k <= t; ++k) direct = seq_[static_cast<std::size_t>(k)] * direct;
    const Signal last = power.segment(t * n_, n_);
    worst = std::max(worst, (last - direct).norm());
    power = apply(power);
  }
  return worst;
}

JointLaplacian::Eigendecomposition JointLaplacian::eigendecompose(double max_condition) const {
  Eigendecomposition out;
  Eigen::EigenSolver<Eigen::MatrixXd> solver(dense(), true);
  if (solver.info() != Eigen::Success) return out;
  out.eigenvalues = solver.eigenvalues();
  out.eigenvectors = solver.eigenvectors();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(out.eigenvectors);
  const auto& sv = svd.singularValues();
  const double smallest = sv[sv.size() - 1];
  out.condition = smallest > 0.0 ? sv[0] / smallest : std::numeric_limits<double>::infinity();
  out.available = out.condition <= max_condition;
  return out;
}

namespace {

double stable_ratio(Complex psi, double rho) {
  const double q = std::abs(psi) * rho;
  if (!(q < 1.0)) {
    std::ostringstream os;
    os << "bound needs |psi| rho < 1, got " << q;
    throw InvalidArgument(os.str());
  }
  return q;
}

}  // namespace

double convergence_distance_bound(Complex psi, Complex phi, Complex c, double rho, double y0_norm,
                                  double x_max, double x_diff_norm, long t1, long t2) {
  const double q = stable_ratio(psi, rho);
  if (t1 < t2) throw InvalidArgument("bound needs t1 >= t2");
  if (!(x_max > 0.0)) throw InvalidArgument("bound needs x_max > 0");
  const double q1 = std::pow(q, static_cast<double>(t1));
  const double q2 = std::pow(q, static_cast<double>(t2));
  return y0_norm * (q1 + q2) / x_max + std::abs(phi) * (q2 - q1) / (1.0 - q) +
         std::abs(c) * x_diff_norm / x_max;
}

double settling_threshold(Complex psi, Complex phi, double rho, double y0_norm, double x_max,
                          double eps) {
  const double q = stable_ratio(psi, rho);
  if (!(eps > 0.0) || !(x_max > 0.0)) throw InvalidArgument("need eps > 0 and x_max > 0");
  const double alpha = y0_norm / x_max + std::abs(phi) / (1.0 - q);
  return std::log(alpha / eps);
}

double settling_rounds(Complex psi, Complex phi, double rho, double y0_norm, double x_max, double eps) {
  const double q = stable_ratio(psi, rho);
  const double log_ratio = settling_threshold(psi, phi, rho, y0_norm, x_max, eps);
  if (q == 0.0) return 0.0;
  return std::max(0.0, log_ratio / -std::log(q));
}

}  // namespace armagf
