#include "armagf/polynomial.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace armagf {

Complex poly_eval(std::span<const Complex> p, Complex x) {
  Complex acc = 0.0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) acc = acc * x + *it;
  return acc;
}

Polynomial poly_derivative(std::span<const Complex> p) {
  if (p.size() <= 1) return {Complex(0.0)};
  Polynomial d(p.size() - 1);
  for (std::size_t k = 1; k < p.size(); ++k) d[k - 1] = static_cast<double>(k) * p[k];
  return d;
}

Polynomial poly_multiply(std::span<const Complex> a, std::span<const Complex> b) {
  if (a.empty() || b.empty()) return {};
  Polynomial out(a.size() + b.size() - 1, Complex(0.0));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
  }
  return out;
}

Polynomial poly_add(std::span<const Complex> a, std::span<const Complex> b) {
  Polynomial out(std::max(a.size(), b.size()), Complex(0.0));
  for (std::size_t i = 0; i < a.size(); ++i) out[i] += a[i];
  for (std::size_t i = 0; i < b.size(); ++i) out[i] += b[i];
  return out;
}

Polynomial poly_scale(std::span<const Complex> p, Complex s) {
  Polynomial out(p.begin(), p.end());
  for (auto& c : out) c *= s;
  return out;
}

Polynomial poly_trim(std::span<const Complex> p, double tol) {
  double scale = 0.0;
  for (const auto& c : p) scale = std::max(scale, std::abs(c));
  std::size_t n = p.size();
  while (n > 1 && std::abs(p[n - 1]) <= tol * scale) --n;
  return Polynomial(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(n));
}

Polynomial poly_from_roots(std::span<const Complex> roots) {
  Polynomial p{Complex(1.0)};
  for (const Complex& r : roots) {
    const Complex factor[2] = {-r, Complex(1.0)};
    p = poly_multiply(p, factor);
  }
  return p;
}

Polynomial poly_substitute_shift(std::span<const Complex> p, Complex s) {
  // Horner in polynomial arithmetic: q = (...(p_n (x+s) + p_{n-1})(x+s) + ...).
  Polynomial q{Complex(0.0)};
  const Complex linear[2] = {s, Complex(1.0)};
  for (auto it = p.rbegin(); it != p.rend(); ++it) {
    q = poly_multiply(q, linear);
    q[0] += *it;
  }
  return poly_trim(q);
}

int poly_degree(std::span<const Complex> p) {
  int d = static_cast<int>(p.size()) - 1;
  while (d > 0 && p[static_cast<std::size_t>(d)] == Complex(0.0)) --d;
  return d;
}

namespace {

// Parlett-Reinsch balancing with radix-2 scaling.
void balance(Eigen::MatrixXcd& m) {
  const Eigen::Index n = m.rows();
  constexpr double radix = 2.0;
  bool converged = false;
  while (!converged) {
    converged = true;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double row = m.row(i).cwiseAbs().sum() - std::abs(m(i, i));
      const double col = m.col(i).cwiseAbs().sum() - std::abs(m(i, i));
      if (row == 0.0 || col == 0.0) continue;
      double f = 1.0;
      double c = col;
      const double s = row + col;
      while (c < row / radix) {
        c *= radix;
        f *= radix;
      }
      while (c >= row * radix) {
        c /= radix;
        f /= radix;
      }
      if ((c + row / f) < 0.95 * s) {
        converged = false;
        m.row(i) /= f;
        m.col(i) *= f;
      }
    }
  }
}

}  // namespace

std::vector<Complex> polynomial_roots(std::span<const Complex> p) {
  if (p.empty()) throw InvalidArgument("polynomial has no coefficients");
  const auto degree = static_cast<Eigen::Index>(p.size()) - 1;
  if (degree == 0) return {};
  const Complex lead = p.back();
  if (lead == Complex(0.0)) throw InvalidArgument("zero leading coefficient");

  Eigen::MatrixXcd companion = Eigen::MatrixXcd::Zero(degree, degree);
  for (Eigen::Index i = 1; i < degree; ++i) companion(i, i - 1) = 1.0;
  for (Eigen::Index i = 0; i < degree; ++i) {
    companion(i, degree - 1) = -p[static_cast<std::size_t>(i)] / lead;
  }
  balance(companion);

  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> solver(companion, false);
  if (solver.info() != Eigen::Success) throw NumericalError("companion eigensolver failed");

  const Polynomial dp = poly_derivative(p);
  std::vector<Complex> roots(solver.eigenvalues().data(),
                             solver.eigenvalues().data() + solver.eigenvalues().size());
  for (Complex& r : roots) {
    for (int it = 0; it < 3; ++it) {
      const Complex f = poly_eval(p, r);
      const Complex df = poly_eval(dp, r);
      if (df == Complex(0.0)) break;
      const Complex candidate = r - f / df;
      if (std::abs(poly_eval(p, candidate)) < std::abs(f)) {
        r = candidate;
      } else {
        break;
      }
    }
  }
  // Conjugate pairs share a real part only up to rounding; compare it with a
  // tolerance so the pair order is stable.
  double scale = 1.0;
  for (const Complex& r : roots) scale = std::max(scale, std::abs(r));
  const double tol = 1e-9 * scale;
  std::stable_sort(roots.begin(), roots.end(), [tol](const Complex& a, const Complex& b) {
    if (std::abs(a.real() - b.real()) > tol) return a.real() < b.real();
    return a.imag() < b.imag();
  });
  return roots;
}

}  // namespace armagf
