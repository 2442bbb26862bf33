#include "armagf/applications.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace armagf {

namespace {

void validate_problem(const Graph& g, const Signal& t) {
  if (t.size() != g.num_nodes()) throw DimensionError("signal length differs from node count");
}

double variant_shift(const LaplacianVariant& variant) {
  switch (variant.kind) {
    case LaplacianKind::shifted_normalized: return 1.0;
    case LaplacianKind::shifted_discrete:
      if (!variant.l) throw InvalidArgument("shifted_discrete basis needs the degree bound l");
      return *variant.l / 2.0;
    default: return 0.0;
  }
}

}  // namespace

FilterDesign tikhonov_design(double w, int K, const LaplacianVariant& variant) {
  if (!(w > 0.0)) throw InvalidArgument("Tikhonov weight w must be positive");
  if (K < 1) throw InvalidArgument("Tikhonov order K must be at least 1");
  const double shift = variant_shift(variant);
  const double radius = std::pow(w, -1.0 / K);

  // Roots of 1 + w (mu + shift)^K.
  std::vector<Complex> poles;
  for (int k = 0; k < K; ++k) {
    const double gamma = (2.0 * k + 1.0) * std::numbers::pi / K;
    poles.push_back(-shift + std::polar(radius, gamma));
  }
  ResiduePoleForm rp;
  for (std::size_t k = 0; k < poles.size(); ++k) {
    Complex prod = w;
    for (std::size_t j = 0; j < poles.size(); ++j) {
      if (j != k) prod *= poles[k] - poles[j];
    }
    rp.pairs.push_back({1.0 / prod, poles[k]});
  }
  FilterDesign d{parallel_from_residue_pole(rp), {}};
  d.stability = check_stability(d.coeffs, variant.bounds());
  return d;
}

Signal tikhonov_direct(const Graph& g, const DenoiseProblem& prob) {
  validate_problem(g, prob.t);
  if (prob.w < 0.0) throw InvalidArgument("Tikhonov weight w must be non-negative");
  if (prob.K < 1) throw InvalidArgument("Tikhonov order K must be at least 1");
  if (prob.w == 0.0) return prob.t;
  const Eigen::MatrixXd L = Eigen::MatrixXd(build_laplacian(g, prob.variant.unshifted()));
  Eigen::MatrixXd LK = Eigen::MatrixXd::Identity(L.rows(), L.cols());
  for (int k = 0; k < prob.K; ++k) LK = LK * L;
  const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(L.rows(), L.cols()) + prob.w * LK;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(0.5 * (A + A.transpose()));
  if (ldlt.info() != Eigen::Success) throw NumericalError("Tikhonov system factorization failed");
  return ldlt.solve(prob.t.real()).cast<Complex>() +
         Complex(0.0, 1.0) * ldlt.solve(prob.t.imag()).cast<Complex>();
}

Complex SpectralRational::operator()(Complex lambda) const {
  const Complex d = poly_eval(den, lambda);
  if (d == Complex(0.0)) throw PoleError("spectral density evaluated at a pole", lambda);
  return poly_eval(num, lambda) / d;
}

Complex wiener_response(const WienerProblem& prob, double lambda) {
  const auto& sx = prob.sigma_x;
  const auto& sn = prob.sigma_n;
  const Complex num = poly_eval(sx.num, lambda) * poly_eval(sn.den, lambda);
  const Complex den = num + poly_eval(sn.num, lambda) * poly_eval(sx.den, lambda);
  if (den == Complex(0.0)) throw PoleError("Wiener response evaluated at a pole", lambda);
  return num / den;
}

namespace {

bool is_zero(const Polynomial& p) {
  for (const Complex& c : p) {
    if (c != Complex(0.0)) return false;
  }
  return true;
}

Complex leading(const Polynomial& p) { return p[static_cast<std::size_t>(poly_degree(p))]; }

}  // namespace

FilterDesign wiener_design(const WienerProblem& prob) {
  const auto& sx = prob.sigma_x;
  const auto& sn = prob.sigma_n;
  if (is_zero(sx.den) || is_zero(sn.den)) throw InvalidArgument("spectral density with zero denominator");

  const Polynomial P = poly_multiply(sx.num, sn.den);
  const Polynomial Q = poly_add(P, poly_multiply(sn.num, sx.den));
  if (is_zero(Q)) throw InvalidArgument("sigma_x + sigma_n vanishes identically");
  const double shift = variant_shift(prob.variant);

  // Work in the basis variable mu = lambda - shift and cancel common roots.
  ResiduePoleForm rp;
  if (is_zero(P)) {
    rp.c = 0.0;
  } else {
    const Polynomial Ps = poly_substitute_shift(poly_trim(P), shift);
    const Polynomial Qs = poly_substitute_shift(poly_trim(Q), shift);
    std::vector<Complex> pr = poly_degree(Ps) > 0 ? polynomial_roots(poly_trim(Ps)) : std::vector<Complex>{};
    std::vector<Complex> qr = poly_degree(Qs) > 0 ? polynomial_roots(poly_trim(Qs)) : std::vector<Complex>{};
    std::vector<bool> used(pr.size(), false);
    std::vector<Complex> poles;
    for (const Complex& q : qr) {
      bool cancelled = false;
      for (std::size_t i = 0; i < pr.size() && !cancelled; ++i) {
        if (!used[i] && std::abs(pr[i] - q) <= 1e-7 * std::max(1.0, std::abs(q))) {
          used[i] = cancelled = true;
        }
      }
      if (!cancelled) poles.push_back(q);
    }
    std::vector<Complex> zeros;
    for (std::size_t i = 0; i < pr.size(); ++i) {
      if (!used[i]) zeros.push_back(pr[i]);
    }
    if (zeros.size() > poles.size()) throw InvalidArgument("Wiener response is not proper");

    const Complex gain = leading(Ps) / leading(Qs);
    const Polynomial num = poly_scale(poly_from_roots(zeros), gain);
    const Polynomial den = poly_from_roots(poles);
    const Polynomial dden = poly_derivative(den);
    rp.c = zeros.size() == poles.size() ? gain : Complex(0.0);
    for (std::size_t i = 0; i < poles.size(); ++i) {
      for (std::size_t j = i + 1; j < poles.size(); ++j) {
        if (std::abs(poles[i] - poles[j]) <= 1e-8) throw PoleError("repeated Wiener pole", poles[i]);
      }
    }
    const SpectralBounds band = prob.variant.bounds();
    for (const Complex& p : poles) {
      if (std::abs(p.imag()) <= 1e-9 * std::max(1.0, std::abs(p)) && band.contains(p.real(), 1e-12)) {
        std::ostringstream os;
        os << "Wiener response has a pole inside the spectral band at " << p.real();
        throw PoleError(os.str(), p);
      }
      rp.pairs.push_back({poly_eval(num, p) / poly_eval(dden, p), p});
    }
  }

  FilterDesign d;
  if (rp.pairs.empty()) {
    d.coeffs = arma1(0.0, 0.0, rp.c);
  } else {
    d.coeffs = parallel_from_residue_pole(rp);
  }
  d.stability = check_stability(d.coeffs, prob.variant.bounds());
  return d;
}

double denoise_mse_monte_carlo(const SpectralDecomposition& sd, const Response& filter,
                               const Response& sigma_x, const Response& sigma_n, int draws,
                               std::uint64_t seed) {
  if (draws < 1) throw InvalidArgument("need at least one Monte-Carlo draw");
  const Eigen::Index n = sd.size();
  Eigen::VectorXd sx(n), sn(n);
  Eigen::VectorXcd h(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double lambda = sd.eigenvalues[i];
    sx[i] = std::sqrt(std::max(0.0, sigma_x(lambda).real()));
    sn[i] = std::sqrt(std::max(0.0, sigma_n(lambda).real()));
    h[i] = filter(lambda);
  }
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  double total = 0.0;
  for (int d = 0; d < draws; ++d) {
    Eigen::VectorXcd xh(n), nh(n);
    for (Eigen::Index i = 0; i < n; ++i) xh[i] = sx[i] * normal(rng);
    for (Eigen::Index i = 0; i < n; ++i) nh[i] = sn[i] * normal(rng);
    // The GFT is orthonormal, so the error can be measured in the spectral domain.
    total += (h.cwiseProduct(xh + nh) - xh).squaredNorm();
  }
  return total / draws;
}

Operator interpolation_operator(const Graph& g, const InterpolationProblem& prob) {
  const int n = g.num_nodes();
  if (static_cast<int>(prob.observed.size()) != n) throw DimensionError("mask length differs from node count");
  Operator L = build_laplacian(g, prob.variant.unshifted());
  L *= prob.w;
  Operator D(n, n);
  std::vector<Eigen::Triplet<double>> diag;
  for (int i = 0; i < n; ++i) {
    if (!prob.observed[static_cast<std::size_t>(i)]) diag.emplace_back(i, i, -1.0);
  }
  D.setFromTriplets(diag.begin(), diag.end());
  Operator out = L + D;
  out.prune(0.0);
  out.makeCompressed();
  return out;
}

namespace {

void validate_interpolation(const Graph& g, const InterpolationProblem& prob) {
  validate_problem(g, prob.t);
  if (static_cast<int>(prob.observed.size()) != g.num_nodes()) {
    throw DimensionError("mask length differs from node count");
  }
  if (!(prob.w >= 0.0)) throw InvalidArgument("interpolation weight must be non-negative");
  bool any = false;
  for (int i = 0; i < g.num_nodes(); ++i) {
    if (prob.observed[static_cast<std::size_t>(i)]) {
      any = true;
    } else if (prob.t[i] != Complex(0.0)) {
      throw InvalidArgument("observations must be zero at unobserved nodes");
    }
  }
  if (!any) throw InvalidArgument("interpolation needs at least one observed node");
}

}  // namespace

InterpolationResult interpolate(const Graph& g, const InterpolationProblem& prob, long max_rounds,
                                double tolerance) {
  validate_interpolation(g, prob);
  const Operator Lhat = interpolation_operator(g, prob);
  const auto sd = spectral_decompose(Lhat);
  const double rho = std::max(std::abs(sd.eigenvalues[0]), std::abs(sd.eigenvalues[sd.size() - 1]));
  if (!(rho < 1.0 - 1e-10)) {
    std::ostringstream os;
    os << "interpolation recursion does not converge: spectral radius of S - I + wL is " << rho;
    throw InvalidArgument(os.str());
  }
  RunOptions opt;
  opt.rounds = max_rounds;
  opt.stop_at_steady = true;
  opt.steady_tolerance = tolerance;
  InterpolationResult res;
  res.rho = rho;
  res.trace = arma1_run(-1.0, 1.0, 0.0, constant_operator(Lhat), constant_signal(prob.t), opt);
  res.x = res.trace.z.back();
  return res;
}

Signal interpolate_direct(const Graph& g, const InterpolationProblem& prob) {
  validate_interpolation(g, prob);
  const int n = g.num_nodes();
  Eigen::MatrixXd A = prob.w * Eigen::MatrixXd(build_laplacian(g, prob.variant.unshifted()));
  for (int i = 0; i < n; ++i) {
    if (prob.observed[static_cast<std::size_t>(i)]) A(i, i) += 1.0;
  }
  Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) throw NumericalError("S + wL is singular");
  return lu.solve(prob.t.real()).cast<Complex>() +
         Complex(0.0, 1.0) * lu.solve(prob.t.imag()).cast<Complex>();
}

}  // namespace armagf
