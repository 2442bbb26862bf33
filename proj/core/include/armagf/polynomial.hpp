#pragma once

#include <span>
#include <vector>

#include "armagf/graph.hpp"

namespace armagf {

/// Coefficients in ascending order: p[0] + p[1] x + ... + p[n] x^n.
using Polynomial = std::vector<Complex>;

Complex poly_eval(std::span<const Complex> p, Complex x);
Polynomial poly_derivative(std::span<const Complex> p);
Polynomial poly_multiply(std::span<const Complex> a, std::span<const Complex> b);
Polynomial poly_add(std::span<const Complex> a, std::span<const Complex> b);
Polynomial poly_scale(std::span<const Complex> p, Complex s);
/// Drops leading coefficients with magnitude <= tol * max |coefficient|.
Polynomial poly_trim(std::span<const Complex> p, double tol = 0.0);
/// Monic polynomial prod_k (x - roots[k]).
Polynomial poly_from_roots(std::span<const Complex> roots);
/// q(x) = p(x + s).
Polynomial poly_substitute_shift(std::span<const Complex> p, Complex s);
int poly_degree(std::span<const Complex> p);

/// Roots from the eigenvalues of the balanced companion matrix, refined by a
/// Newton step on the original polynomial and sorted by (real, imag).
/// Throws InvalidArgument on a zero leading coefficient.
std::vector<Complex> polynomial_roots(std::span<const Complex> p);

}  // namespace armagf
