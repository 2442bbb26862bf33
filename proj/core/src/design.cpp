#include "armagf/design.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "json.hpp"

namespace armagf {

Complex RationalResponse::operator()(Complex lambda) const {
  const Complex den = denominator(lambda);
  if (den == Complex(0.0)) throw PoleError("rational response evaluated at a pole", lambda);
  return numerator(lambda) / den;
}

void RationalResponse::validate() const {
  if (a.size() < 2) throw InvalidArgument("rational response needs K >= 1");
  if (b.size() != a.size()) throw InvalidArgument("numerator and denominator lengths differ");
  if (a[0] != Complex(1.0)) throw InvalidArgument("denominator must have a_0 = 1");
  for (const auto& v : {std::span<const Complex>(a), std::span<const Complex>(b)}) {
    for (const Complex& c : v) {
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag())) {
        throw InvalidArgument("rational response has non-finite coefficients");
      }
    }
  }
}

Complex ResiduePoleForm::operator()(Complex lambda) const {
  Complex h = c;
  for (const auto& rp : pairs) {
    if (lambda == rp.p) throw PoleError("residue-pole form evaluated at a pole", lambda);
    h += rp.r / (lambda - rp.p);
  }
  return h;
}

namespace {

Eigen::VectorXcd least_squares(const Eigen::MatrixXcd& M, const Eigen::VectorXcd& rhs,
                               const char* what) {
  Eigen::ColPivHouseholderQR<Eigen::MatrixXcd> qr(M);
  qr.setThreshold(1e-13);
  if (qr.rank() < M.cols()) {
    throw NumericalError(std::string(what) + " is singular (rank " + std::to_string(qr.rank()) +
                         " < " + std::to_string(M.cols()) + ")");
  }
  return qr.solve(rhs);
}

}  // namespace

RationalResponse shanks_fit(const Response& target, int K, int K_hat, std::span<const double> grid) {
  if (K < 1) throw InvalidArgument("rational order K must be at least 1");
  if (K_hat <= K) throw InvalidArgument("regression order must exceed K");
  const auto m = static_cast<Eigen::Index>(grid.size());
  if (m < K_hat + 1) throw InvalidArgument("grid too small for the regression order");

  const FirDesign regression = fir_design_ls(target, K_hat, grid);
  const auto& g = regression.coeffs.h;
  auto coef = [&](int j) { return (j < 0 || j > K_hat) ? Complex(0.0) : g[static_cast<std::size_t>(j)]; };

  // Coefficients of lambda^j, j = K+1 .. K+K_hat, of p_d(lambda) H_hat(lambda) vanish.
  Eigen::MatrixXcd D(K_hat, K);
  Eigen::VectorXcd rhs(K_hat);
  for (int row = 0; row < K_hat; ++row) {
    const int j = K + 1 + row;
    for (int k = 1; k <= K; ++k) D(row, k - 1) = coef(j - k);
    rhs[row] = -coef(j);
  }
  double g_scale = 0.0;
  for (const Complex& c : g) g_scale = std::max(g_scale, std::abs(c));
  // A regression of degree <= K leaves nothing to match: keep p_d = 1.
  const bool polynomial_target = D.norm() <= 1e-12 * std::max(g_scale, 1e-300) &&
                                 rhs.norm() <= 1e-12 * std::max(g_scale, 1e-300);
  const Eigen::VectorXcd a_tail =
      polynomial_target ? Eigen::VectorXcd::Zero(K) : least_squares(D, rhs, "denominator system");

  RationalResponse rr;
  rr.a.assign(static_cast<std::size_t>(K) + 1, Complex(0.0));
  rr.a[0] = 1.0;
  for (int k = 1; k <= K; ++k) rr.a[static_cast<std::size_t>(k)] = a_tail[k - 1];

  Eigen::MatrixXcd N(m, K + 1);
  Eigen::VectorXcd h(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    const double lambda = grid[static_cast<std::size_t>(i)];
    const Complex den = rr.denominator(lambda);
    if (std::abs(den) < 1e-14) {
      std::ostringstream os;
      os << "denominator vanishes on the grid at lambda = " << lambda;
      throw PoleError(os.str(), lambda);
    }
    Complex p = 1.0;
    for (int k = 0; k <= K; ++k, p *= lambda) N(i, k) = p / den;
    h[i] = target(lambda);
  }
  const Eigen::VectorXcd b = least_squares(N, h, "numerator system");
  rr.b.assign(b.data(), b.data() + b.size());
  return rr;
}

RationalResponse shanks_fit(const Response& target, int K, const SpectralBounds& bounds,
                            int grid_size) {
  const auto grid = uniform_grid(bounds.lambda_min, bounds.lambda_max, grid_size);
  return shanks_fit(target, K, K + 1, grid);
}

namespace {

void require_simple(const std::vector<Complex>& roots) {
  for (std::size_t i = 0; i < roots.size(); ++i) {
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      if (std::abs(roots[i] - roots[j]) <= 1e-8) {
        std::ostringstream os;
        os << "repeated pole near " << roots[i];
        throw PoleError(os.str(), roots[i]);
      }
    }
  }
}

std::vector<Complex> denominator_roots(const RationalResponse& rr) {
  rr.validate();
  double scale = 0.0;
  for (const Complex& c : rr.a) scale = std::max(scale, std::abs(c));
  if (std::abs(rr.a.back()) <= 1e-14 * scale) {
    throw InvalidArgument("zero leading denominator coefficient");
  }
  auto roots = polynomial_roots(rr.a);
  require_simple(roots);
  return roots;
}

}  // namespace

ResiduePoleForm to_residue_pole(const RationalResponse& rr) {
  const auto poles = denominator_roots(rr);
  const Polynomial da = poly_derivative(rr.a);

  ResiduePoleForm rp;
  rp.c = rr.b.back() / rr.a.back();
  for (const Complex& p : poles) rp.pairs.push_back({rr.numerator(p) / poly_eval(da, p), p});

  double extent = 1.0;
  for (const Complex& p : poles) extent = std::max(extent, std::abs(p));
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> dist(-extent, extent);
  int checked = 0;
  for (int attempt = 0; checked < 20 && attempt < 200; ++attempt) {
    const Complex lambda(dist(rng), 0.0);
    bool near_pole = false;
    for (const Complex& p : poles) near_pole = near_pole || std::abs(lambda - p) < 1e-3 * extent;
    if (near_pole) continue;
    const Complex expected = rr(lambda);
    const Complex got = rp(lambda);
    if (std::abs(got - expected) > 1e-6 * std::max(1.0, std::abs(expected))) {
      std::ostringstream os;
      os << "partial-fraction expansion does not reproduce the response at lambda = "
         << lambda.real();
      throw NumericalError(os.str());
    }
    ++checked;
  }
  return rp;
}

ArmaParallelCoefficients parallel_from_residue_pole(const ResiduePoleForm& rp) {
  ArmaParallelCoefficients coeffs;
  coeffs.c = rp.c;
  for (const auto& [r, p] : rp.pairs) {
    if (p == Complex(0.0)) throw PoleError("pole at zero has no parallel realization", p);
    coeffs.branches.push_back({1.0 / p, -r / p});
  }
  return coeffs;
}

ResiduePoleForm residue_pole_from_parallel(const ArmaParallelCoefficients& coeffs) {
  ResiduePoleForm rp;
  rp.c = coeffs.c;
  const auto p = coeffs.poles();
  const auto r = coeffs.residues();
  for (std::size_t k = 0; k < p.size(); ++k) rp.pairs.push_back({r[k], p[k]});
  return rp;
}

ArmaPeriodicCoefficients periodic_from_rational(const RationalResponse& rr) {
  denominator_roots(rr);
  const int K = rr.order();
  const Complex a1 = rr.a[1];
  if (a1 == Complex(0.0)) {
    throw NumericalError("unsolvable root matching: a_1 = 0 leaves the first stage undetermined");
  }

  ArmaPeriodicCoefficients coeffs;
  coeffs.c = rr.b.back() / rr.a.back();
  coeffs.cycle.assign(static_cast<std::size_t>(K), PeriodicStage{1.0, 0.0, 0.0});
  coeffs.cycle[0].theta = 0.0;
  coeffs.cycle[0].psi = -a1;

  // prod_{k>=1} (1 + psi_k lambda) = (a_1 + a_2 lambda + ... + a_K lambda^{K-1}) / a_1.
  if (K > 1) {
    Polynomial q(rr.a.begin() + 1, rr.a.end());
    for (auto& v : q) v /= a1;
    const auto roots = polynomial_roots(q);
    require_simple(roots);
    for (int k = 1; k < K; ++k) coeffs.cycle[static_cast<std::size_t>(k)].psi = -1.0 / roots[static_cast<std::size_t>(k - 1)];
  }

  // sum_k phi_k prod_{tau>k}(1 + psi_tau lambda) = b(lambda) - c a(lambda).
  Eigen::MatrixXcd M = Eigen::MatrixXcd::Zero(K, K);
  Polynomial tail{Complex(1.0)};
  for (int k = K - 1; k >= 0; --k) {
    for (std::size_t j = 0; j < tail.size(); ++j) M(static_cast<Eigen::Index>(j), k) = tail[j];
    const Complex factor[2] = {coeffs.cycle[static_cast<std::size_t>(k)].theta,
                               coeffs.cycle[static_cast<std::size_t>(k)].psi};
    tail = poly_multiply(tail, factor);
  }
  Eigen::VectorXcd rhs(K);
  for (int j = 0; j < K; ++j) rhs[j] = rr.b[static_cast<std::size_t>(j)] - coeffs.c * rr.a[static_cast<std::size_t>(j)];
  Eigen::FullPivLU<Eigen::MatrixXcd> lu(M);
  if (!lu.isInvertible()) throw NumericalError("singular numerator system for the periodic stages");
  const Eigen::VectorXcd phi = lu.solve(rhs);
  for (int k = 0; k < K; ++k) coeffs.cycle[static_cast<std::size_t>(k)].phi = phi[k];
  return coeffs;
}

StabilityReport check_stability(const ArmaParallelCoefficients& coeffs, const SpectralBounds& bounds) {
  StabilityReport rep;
  rep.rho = bounds.rho();
  rep.factor = coeffs.stability_factor(rep.rho);
  rep.band_factor = rep.factor;
  rep.stable = true;
  for (const auto& b : coeffs.branches) {
    const double margin = b.psi == Complex(0.0) ? std::numeric_limits<double>::infinity()
                                                : 1.0 / std::abs(b.psi) - rep.rho;
    rep.margins.push_back(margin);
    rep.stable = rep.stable && margin > 0.0;
  }
  return rep;
}

StabilityReport check_stability(const ArmaPeriodicCoefficients& coeffs, const SpectralBounds& bounds) {
  StabilityReport rep;
  rep.rho = bounds.rho();
  rep.factor = coeffs.stability_product(rep.rho);
  rep.band_factor = coeffs.band_gain(bounds.lambda_min, bounds.lambda_max);
  rep.margins.push_back(1.0 - rep.factor);
  rep.stable = rep.factor < 1.0;
  return rep;
}

StabilityReport check_stability(const ArmaCoefficients& coeffs, const SpectralBounds& bounds) {
  return std::visit([&](const auto& c) { return check_stability(c, bounds); }, coeffs);
}

double squared_response_error(const Response& fitted, const Response& target,
                              std::span<const double> grid) {
  double sum = 0.0;
  for (double lambda : grid) sum += std::norm(fitted(lambda) - target(lambda));
  return sum;
}

Architecture parse_architecture(std::string_view name) {
  if (name == "parallel") return Architecture::parallel;
  if (name == "periodic") return Architecture::periodic;
  throw InvalidArgument("unknown filter architecture '" + std::string(name) + "'");
}

namespace {

nlohmann::json complex_json(Complex c) { return {c.real(), c.imag()}; }

nlohmann::json complex_list(const std::vector<Complex>& v) {
  auto a = nlohmann::json::array();
  for (const Complex& c : v) a.push_back(complex_json(c));
  return a;
}

}  // namespace

std::string DesignReport::to_json() const {
  nlohmann::json j;
  j["target_id"] = target_id;
  j["K"] = K;
  j["K_hat"] = K_hat;
  j["grid_size"] = grid_size;
  j["bounds"] = {bounds.lambda_min, bounds.lambda_max};
  j["residual"] = squared_error;
  j["rms_error"] = rms_error;
  j["verdict"] = stability.stable ? "stable" : "unstable";
  j["rho"] = stability.rho;
  j["stability_factor"] = stability.factor;
  j["band_factor"] = stability.band_factor;
  j["margins"] = stability.margins;
  j["rational"] = {{"b", complex_list(rational.b)}, {"a", complex_list(rational.a)}};
  j["coefficients"] = nlohmann::json::parse(coefficients_to_json(coefficients));
  return j.dump(2);
}

DesignReport design_arma(const Response& target, int K, const SpectralBounds& bounds,
                         Architecture arch, std::optional<int> K_hat, int grid_size,
                         std::string target_id) {
  const auto grid = uniform_grid(bounds.lambda_min, bounds.lambda_max, grid_size);
  DesignReport rep;
  rep.target_id = std::move(target_id);
  rep.K = K;
  rep.K_hat = K_hat.value_or(K + 1);
  rep.grid_size = grid_size;
  rep.bounds = bounds;
  rep.rational = shanks_fit(target, K, rep.K_hat, grid);
  if (arch == Architecture::parallel) {
    rep.coefficients = parallel_from_residue_pole(to_residue_pole(rep.rational));
  } else {
    rep.coefficients = periodic_from_rational(rep.rational);
  }
  rep.stability = check_stability(rep.coefficients, bounds);
  const ArmaCoefficients coeffs = rep.coefficients;
  rep.squared_error = squared_response_error(
      [&](double l) { return response_static(coeffs, l); }, target, grid);
  rep.rms_error = std::sqrt(rep.squared_error / static_cast<double>(grid.size()));
  return rep;
}

Response lowpass_step(double cutoff) {
  return [cutoff](double lambda) { return Complex(lambda <= cutoff ? 1.0 : 0.0); };
}

Response highpass_step(double cutoff) {
  return [cutoff](double lambda) { return Complex(lambda >= cutoff ? 1.0 : 0.0); };
}

Response named_target(const std::string& name, double parameter) {
  if (name == "lowpass") return lowpass_step(parameter);
  if (name == "highpass") return highpass_step(parameter);
  if (name == "heat") return [parameter](double l) { return Complex(std::exp(-parameter * l)); };
  if (name == "constant") return [parameter](double) { return Complex(parameter); };
  throw InvalidArgument("unknown target '" + name + "'");
}

}  // namespace armagf
