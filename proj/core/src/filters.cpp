#include "armagf/filters.hpp"

#include <cmath>
#include <fstream>
#include <ostream>
#include <sstream>

#include "armagf/polynomial.hpp"
#include "json.hpp"

namespace armagf {

namespace {

void check_pole(Complex denominator, Complex scale, Complex lambda) {
  if (std::abs(denominator) <= 1e-13 * std::max(1.0, std::abs(scale))) {
    throw PoleError("response evaluated at a pole", lambda);
  }
}

void check_sizes(const Operator& L, const Signal& x, const FilterState& state) {
  if (L.rows() != L.cols() || L.rows() != x.size()) {
    throw DimensionError("operator and input sizes differ");
  }
  for (const Signal& y : state.y) {
    if (y.size() != x.size()) throw DimensionError("filter state size differs from input");
  }
}

void check_finite(const Signal& y, long round, std::size_t branch) {
  const double n = y.norm();
  if (!std::isfinite(n) || n > kDivergenceThreshold) throw DivergenceError(round, branch, n);
}

}  // namespace

std::vector<Complex> ArmaParallelCoefficients::poles() const {
  std::vector<Complex> p;
  p.reserve(branches.size());
  for (const auto& b : branches) {
    if (b.psi == Complex(0.0)) throw PoleError("branch with psi = 0 has no finite pole", 0.0);
    p.push_back(1.0 / b.psi);
  }
  return p;
}

std::vector<Complex> ArmaParallelCoefficients::residues() const {
  std::vector<Complex> r;
  r.reserve(branches.size());
  for (const auto& b : branches) {
    if (b.psi == Complex(0.0)) throw PoleError("branch with psi = 0 has no finite pole", 0.0);
    r.push_back(-b.phi / b.psi);
  }
  return r;
}

double ArmaParallelCoefficients::stability_factor(double rho) const {
  double worst = 0.0;
  for (const auto& b : branches) worst = std::max(worst, std::abs(b.psi) * rho);
  return worst;
}

Complex ArmaPeriodicCoefficients::cycle_gain(Complex lambda) const {
  Complex g = 1.0;
  for (const auto& s : cycle) g *= s.theta + s.psi * lambda;
  return g;
}

double ArmaPeriodicCoefficients::stability_product(double rho) const {
  return std::abs(cycle_gain(rho));
}

double ArmaPeriodicCoefficients::band_gain(double lo, double hi) const {
  if (hi < lo) throw InvalidArgument("band_gain needs lo <= hi");
  // |P(l)|^2 = P(l) conj(P)(l) on the real line; its maximum sits at an
  // endpoint or at a real critical point.
  Polynomial P{1.0};
  for (const auto& s : cycle) P = poly_multiply(P, Polynomial{s.theta, s.psi});
  Polynomial Pc(P.size());
  for (std::size_t i = 0; i < P.size(); ++i) Pc[i] = std::conj(P[i]);
  const Polynomial dQ = poly_trim(poly_derivative(poly_multiply(P, Pc)), 1e-14);
  double best = std::max(std::abs(cycle_gain(lo)), std::abs(cycle_gain(hi)));
  if (poly_degree(dQ) >= 1) {
    const double tol = 1e-7 * std::max({1.0, std::abs(lo), std::abs(hi)});
    for (Complex r : polynomial_roots(dQ)) {
      if (std::abs(r.imag()) <= tol && r.real() >= lo && r.real() <= hi) {
        best = std::max(best, std::abs(cycle_gain(r.real())));
      }
    }
  }
  return best;
}

ArmaParallelCoefficients arma1(Complex psi, Complex phi, Complex c) {
  return ArmaParallelCoefficients{{ArmaBranch{psi, phi}}, c};
}

Complex response_static(const ArmaParallelCoefficients& coeffs, Complex lambda) {
  Complex h = coeffs.c;
  for (const auto& b : coeffs.branches) {
    if (b.phi == Complex(0.0)) continue;
    const Complex den = 1.0 - b.psi * lambda;
    check_pole(den, b.psi * lambda, lambda);
    h += b.phi / den;
  }
  return h;
}

Complex response_static(const ArmaPeriodicCoefficients& coeffs, Complex lambda) {
  const std::size_t K = coeffs.cycle.size();
  if (K == 0) return coeffs.c;
  Complex numerator = 0.0;
  Complex tail = 1.0;  // prod_{tau > k} (theta_tau + psi_tau lambda)
  for (std::size_t k = K; k-- > 0;) {
    numerator += tail * coeffs.cycle[k].phi;
    tail *= coeffs.cycle[k].theta + coeffs.cycle[k].psi * lambda;
  }
  if (numerator == Complex(0.0)) return coeffs.c;
  const Complex den = 1.0 - tail;
  check_pole(den, tail, lambda);
  return coeffs.c + numerator / den;
}

Complex response_static(const ArmaCoefficients& coeffs, Complex lambda) {
  return std::visit([&](const auto& c) { return response_static(c, lambda); }, coeffs);
}

Signal spectral_apply(const SpectralDecomposition& sd, const Response& h, const Signal& x) {
  Signal xh = gft(sd, x);
  for (Eigen::Index n = 0; n < xh.size(); ++n) xh[n] *= h(sd.eigenvalues[n]);
  return igft(sd, xh);
}

FilterState FilterState::zeros(std::size_t branches, Eigen::Index n) {
  return FilterState{std::vector<Signal>(branches, Signal::Zero(n)), 0};
}

Signal arma1_step(FilterState& state, const Operator& L, const Signal& x, Complex psi, Complex phi,
                  Complex c) {
  if (state.y.size() != 1) throw DimensionError("ARMA_1 state needs exactly one vector");
  check_sizes(L, x, state);
  Signal y = psi * (L * state.y[0]) + phi * x;
  check_finite(y, state.t + 1, 0);
  state.y[0] = std::move(y);
  ++state.t;
  return state.y[0] + c * x;
}

Signal parallel_step(FilterState& state, const Operator& L, const Signal& x,
                     const ArmaParallelCoefficients& coeffs) {
  if (state.y.size() != coeffs.branches.size()) {
    throw DimensionError("filter state has the wrong number of branches");
  }
  check_sizes(L, x, state);
  Signal z = coeffs.c * x;
  for (std::size_t k = 0; k < coeffs.branches.size(); ++k) {
    Signal y = coeffs.branches[k].psi * (L * state.y[k]) + coeffs.branches[k].phi * x;
    check_finite(y, state.t + 1, k);
    state.y[k] = std::move(y);
    z += state.y[k];
  }
  ++state.t;
  return z;
}

Signal periodic_step(FilterState& state, const Operator& L, const Signal& x,
                     const ArmaPeriodicCoefficients& coeffs) {
  if (coeffs.cycle.empty()) throw InvalidArgument("periodic filter needs at least one stage");
  if (state.y.size() != 1) throw DimensionError("periodic state needs exactly one vector");
  check_sizes(L, x, state);
  const auto& s = coeffs.cycle[static_cast<std::size_t>(state.t % coeffs.period())];
  Signal y = s.theta * state.y[0] + s.psi * (L * state.y[0]) + s.phi * x;
  check_finite(y, state.t + 1, 0);
  state.y[0] = std::move(y);
  ++state.t;
  return state.y[0] + coeffs.c * x;
}

SignalSource constant_signal(Signal x) {
  return [x = std::move(x)](long) { return x; };
}

SignalSource signal_sequence(std::vector<Signal> xs) {
  auto seq = std::make_shared<const std::vector<Signal>>(std::move(xs));
  return [seq](long t) -> Signal {
    if (t < 0 || static_cast<std::size_t>(t) >= seq->size()) {
      throw InvalidArgument("signal sequence exhausted at round " + std::to_string(t));
    }
    return (*seq)[static_cast<std::size_t>(t)];
  };
}

OperatorSource constant_operator(Operator L) {
  auto op = std::make_shared<const Operator>(std::move(L));
  return [op](long) -> const Operator& { return *op; };
}

OperatorSource operator_sequence(std::vector<Operator> ops) {
  auto seq = std::make_shared<const std::vector<Operator>>(std::move(ops));
  return [seq](long t) -> const Operator& {
    if (t < 0 || static_cast<std::size_t>(t) >= seq->size()) {
      throw InvalidArgument("operator sequence exhausted at round " + std::to_string(t));
    }
    return (*seq)[static_cast<std::size_t>(t)];
  };
}

OperatorSource operator_sequence_view(const std::vector<Operator>& ops) {
  return [&ops](long t) -> const Operator& {
    if (t < 0 || static_cast<std::size_t>(t) >= ops.size()) {
      throw InvalidArgument("operator sequence exhausted at round " + std::to_string(t));
    }
    return ops[static_cast<std::size_t>(t)];
  };
}

const Signal& SimulationTrace::last_valid() const {
  for (std::size_t i = z.size(); i-- > 0;) {
    if (valid[i]) return z[i];
  }
  throw InvalidArgument("trace has no valid output");
}

namespace {

// Shared driver: `step` advances the state by one round and returns z.
template <class Step>
SimulationTrace run_loop(std::size_t branches, int period, const OperatorSource& Ls,
                         const SignalSource& xs, const RunOptions& options, Step&& step) {
  if (options.rounds < 0) throw InvalidArgument("rounds must be non-negative");
  SimulationTrace trace;
  if (options.rounds == 0) return trace;

  const Eigen::Index n = Ls(0).rows();
  FilterState state = FilterState::zeros(branches, n);
  if (options.y0) {
    if (options.y0->size() != n) throw DimensionError("initial state size differs from graph");
    for (auto& y : state.y) y = *options.y0;
  }

  const auto reserve = static_cast<std::size_t>(options.rounds);
  trace.z.reserve(reserve);
  trace.valid.reserve(reserve);
  trace.messages.reserve(reserve);
  trace.memory.reserve(reserve);

  const Signal* previous = nullptr;
  int calm = 0;
  for (long t = 0; t < options.rounds; ++t) {
    const Operator& L = Ls(t);
    const Signal x = xs(t);
    Signal z = step(state, L, x);
    const std::size_t m = operator_edge_count(L);
    const bool valid = (t + 1) % period == 0;
    trace.z.push_back(std::move(z));
    trace.valid.push_back(valid);
    trace.messages.push_back(2 * m * branches);
    trace.memory.push_back(branches * (static_cast<std::size_t>(n) + 2 * m));

    if (!valid) continue;
    const Signal& current = trace.z.back();
    if (previous) {
      const double scale = std::max(current.norm(), 1e-300);
      calm = (current - *previous).norm() <= options.steady_tolerance * scale ? calm + 1 : 0;
      if (calm >= options.steady_count && !trace.steady_round) {
        trace.steady_round = t + 1;
        if (options.stop_at_steady) break;
      }
    }
    previous = &trace.z.back();
  }
  return trace;
}

}  // namespace

SimulationTrace arma1_run(Complex psi, Complex phi, Complex c, const OperatorSource& L,
                          const SignalSource& x, const RunOptions& options) {
  auto trace = run_loop(1, 1, L, x, options, [&](FilterState& s, const Operator& op, const Signal& xt) {
    return arma1_step(s, op, xt, psi, phi, c);
  });
  trace.metadata["kind"] = "arma1";
  return trace;
}

SimulationTrace parallel_arma_run(const ArmaParallelCoefficients& coeffs, const OperatorSource& L,
                                  const SignalSource& x, const RunOptions& options) {
  if (coeffs.branches.empty()) throw InvalidArgument("parallel filter needs at least one branch");
  auto trace = run_loop(coeffs.branches.size(), 1, L, x, options,
                        [&](FilterState& s, const Operator& op, const Signal& xt) {
                          return parallel_step(s, op, xt, coeffs);
                        });
  trace.metadata["kind"] = "parallel";
  trace.metadata["coefficients"] = coefficients_to_json(coeffs);
  return trace;
}

SimulationTrace periodic_arma_run(const ArmaPeriodicCoefficients& coeffs, const OperatorSource& L,
                                  const SignalSource& x, const RunOptions& options) {
  if (coeffs.cycle.empty()) throw InvalidArgument("periodic filter needs at least one stage");
  auto trace = run_loop(1, coeffs.period(), L, x, options,
                        [&](FilterState& s, const Operator& op, const Signal& xt) {
                          return periodic_step(s, op, xt, coeffs);
                        });
  trace.metadata["kind"] = "periodic";
  trace.metadata["coefficients"] = coefficients_to_json(coeffs);
  return trace;
}

SimulationTrace arma_run(const ArmaCoefficients& coeffs, const OperatorSource& L,
                         const SignalSource& x, const RunOptions& options) {
  if (const auto* p = std::get_if<ArmaParallelCoefficients>(&coeffs)) {
    return parallel_arma_run(*p, L, x, options);
  }
  return periodic_arma_run(std::get<ArmaPeriodicCoefficients>(coeffs), L, x, options);
}

LiftedSystem lifted_periodic_system(const ArmaPeriodicCoefficients& coeffs, const Operator& L) {
  if (L.rows() != L.cols()) throw DimensionError("operator is not square");
  const Eigen::Index n = L.rows();
  const Eigen::MatrixXcd Ld = Eigen::MatrixXd(L).cast<Complex>();
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(n, n);
  LiftedSystem sys{I, Eigen::MatrixXcd::Zero(n, n)};
  // After stage k: A <- Gamma_k A, B <- Gamma_k B + phi_k I.
  for (const auto& s : coeffs.cycle) {
    const Eigen::MatrixXcd gamma = s.theta * I + s.psi * Ld;
    sys.A = gamma * sys.A;
    sys.B = gamma * sys.B + s.phi * I;
  }
  return sys;
}

void write_trace_csv(std::ostream& out, const SimulationTrace& trace) {
  out << "t,node,z_re,z_im,valid,msgs,mem\n";
  out.precision(12);
  for (std::size_t i = 0; i < trace.z.size(); ++i) {
    const Signal& z = trace.z[i];
    for (Eigen::Index n = 0; n < z.size(); ++n) {
      out << i + 1 << ',' << n << ',' << z[n].real() << ',' << z[n].imag() << ','
          << (trace.valid[i] ? 1 : 0) << ',' << trace.messages[i] << ',' << trace.memory[i] << '\n';
    }
  }
}

namespace {

using nlohmann::json;

json complex_array(const std::vector<Complex>& v) {
  json a = json::array();
  for (const Complex& c : v) a.push_back({c.real(), c.imag()});
  return a;
}

std::vector<Complex> parse_complex_array(const json& a, const char* key) {
  if (!a.is_array()) throw InvalidArgument(std::string("coefficient key '") + key + "' must be an array");
  std::vector<Complex> v;
  for (const json& e : a) {
    if (e.is_number()) {
      v.emplace_back(e.get<double>(), 0.0);
    } else if (e.is_array() && e.size() == 2) {
      v.emplace_back(e[0].get<double>(), e[1].get<double>());
    } else {
      throw InvalidArgument(std::string("bad entry in coefficient array '") + key + "'");
    }
  }
  return v;
}

}  // namespace

std::string coefficients_to_json(const ArmaCoefficients& coeffs) {
  json j;
  std::vector<Complex> psi, phi, theta;
  Complex c;
  if (const auto* p = std::get_if<ArmaParallelCoefficients>(&coeffs)) {
    j["kind"] = "parallel";
    for (const auto& b : p->branches) {
      psi.push_back(b.psi);
      phi.push_back(b.phi);
    }
    c = p->c;
  } else {
    const auto& q = std::get<ArmaPeriodicCoefficients>(coeffs);
    j["kind"] = "periodic";
    for (const auto& s : q.cycle) {
      theta.push_back(s.theta);
      psi.push_back(s.psi);
      phi.push_back(s.phi);
    }
    c = q.c;
  }
  j["K"] = psi.size();
  j["c_re"] = c.real();
  j["c_im"] = c.imag();
  j["psi"] = complex_array(psi);
  j["phi"] = complex_array(phi);
  j["theta"] = complex_array(theta);
  return j.dump(2);
}

ArmaCoefficients coefficients_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("coefficient file is not valid JSON: ") + e.what());
  }
  const std::string kind = j.value("kind", "parallel");
  const Complex c(j.value("c_re", 0.0), j.value("c_im", 0.0));
  const auto psi = parse_complex_array(j.at("psi"), "psi");
  const auto phi = parse_complex_array(j.at("phi"), "phi");
  if (psi.size() != phi.size()) throw InvalidArgument("psi and phi lengths differ");
  if (j.contains("K") && j["K"].get<std::size_t>() != psi.size()) {
    throw InvalidArgument("K does not match the coefficient arrays");
  }
  if (kind == "parallel" || kind == "arma1") {
    ArmaParallelCoefficients p;
    p.c = c;
    for (std::size_t k = 0; k < psi.size(); ++k) p.branches.push_back({psi[k], phi[k]});
    return p;
  }
  if (kind == "periodic") {
    const auto theta = j.contains("theta") ? parse_complex_array(j["theta"], "theta")
                                           : std::vector<Complex>{};
    if (theta.size() != psi.size()) throw InvalidArgument("theta length differs from psi");
    ArmaPeriodicCoefficients q;
    q.c = c;
    for (std::size_t k = 0; k < psi.size(); ++k) q.cycle.push_back({theta[k], psi[k], phi[k]});
    return q;
  }
  throw InvalidArgument("unknown coefficient kind '" + kind + "'");
}

void write_coefficients_file(const std::string& path, const ArmaCoefficients& coeffs) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path);
  out << coefficients_to_json(coeffs) << '\n';
}

ArmaCoefficients read_coefficients_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open coefficient file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return coefficients_from_json(ss.str());
}

}  // namespace armagf
