#include "doctest.h"
#include "support.hpp"

#include "armagf/applications.hpp"

using namespace armagf;
using namespace armagf::testing;

namespace {

const LaplacianVariant kShifted{LaplacianKind::shifted_normalized, std::nullopt};
const LaplacianVariant kNormalized{LaplacianKind::normalized, std::nullopt};

// Sum over n of H(lambda_n) <t, phi_n> phi_n with H = 1 / (1 + w lambda^K).
Signal spectral_tikhonov(const Graph& g, const Signal& t, double w, int K) {
  const auto sd = spectral_decompose(build_laplacian(g, kNormalized));
  return spectral_apply(sd, [&](double l) { return Complex(1.0 / (1.0 + w * std::pow(l, K))); }, t);
}

Signal arma_limit(const Graph& g, const ArmaParallelCoefficients& c, const LaplacianVariant& v, const Signal& t) {
  RunOptions o;
  o.rounds = 5000;
  o.stop_at_steady = true;
  o.steady_tolerance = 1e-13;
  return parallel_arma_run(c, constant_operator(build_laplacian(g, v)), constant_signal(t), o).z.back();
}

}  // namespace

TEST_CASE("Tikhonov K = 1 on the shifted normalized basis") {
  for (double w : {0.1, 0.5, 3.0}) {
    const auto d = tikhonov_design(w, 1, kShifted);
    REQUIRE(d.coeffs.order() == 1);
    CHECK(std::abs(d.coeffs.branches[0].phi - 2.0 / (2.0 + 2.0 * w)) < 1e-14);
    CHECK(std::abs(d.coeffs.branches[0].psi + 2.0 * w / (2.0 + 2.0 * w)) < 1e-14);
    CHECK(d.coeffs.c == Complex(0.0));
    CHECK(d.stability.stable);
  }
  const auto tiny = tikhonov_design(1e-6, 1, kShifted);
  CHECK(std::abs(response_static(tiny.coeffs, 0.3) - 1.0) < 1e-5);
  CHECK(tiny.stability.margins[0] > 1e5);
}

TEST_CASE("Tikhonov responses in every basis") {
  const Graph g = geometric(20, 2);
  const double l = 2.0 * g.max_degree();
  for (int K : {1, 2, 3, 4}) {
    for (double w : {0.3, 1.7}) {
      for (const auto& v : {kShifted, kNormalized, LaplacianVariant{LaplacianKind::discrete, l},
                            LaplacianVariant{LaplacianKind::shifted_discrete, l}}) {
        const auto d = tikhonov_design(w, K, v);
        const double shift = v.shift(g);
        for (double lam : uniform_grid(v.bounds().lambda_min, v.bounds().lambda_max, 21)) {
          const double orig = lam + shift;
          CHECK(std::abs(response_static(d.coeffs, lam) - 1.0 / (1.0 + w * std::pow(orig, K))) < 1e-10);
        }
      }
    }
  }
  CHECK_THROWS_AS(tikhonov_design(0.0, 1, kShifted), InvalidArgument);
  CHECK_THROWS_AS(tikhonov_design(1.0, 0, kShifted), InvalidArgument);
  CHECK_THROWS_AS(tikhonov_design(1.0, 1, LaplacianVariant{LaplacianKind::shifted_discrete, std::nullopt}),
                  InvalidArgument);
}

TEST_CASE("Tikhonov stability for the standard orders") {
  for (int K : {1, 2}) {
    for (double w : {1e-3, 0.5, 1.0, 2.0, 10.0, 100.0}) CHECK(tikhonov_design(w, K, kShifted).stability.stable);
  }
  // Unshifted normalized: stable only while w^{1/K} rho < 1.
  CHECK(tikhonov_design(0.2, 1, kNormalized).stability.stable);
  CHECK_FALSE(tikhonov_design(0.8, 1, kNormalized).stability.stable);
}

TEST_CASE("direct Tikhonov solve") {
  const Graph g = geometric(40, 6);
  const Signal t = random_signal(40, 2);
  CHECK((tikhonov_direct(g, DenoiseProblem{t, 0.0, 1, kShifted}) - t).norm() == 0.0);
  for (int K : {1, 2, 3}) {
    const DenoiseProblem p{t, 0.7, K, kShifted};
    CHECK(rel(tikhonov_direct(g, p), spectral_tikhonov(g, t, 0.7, K)) < 1e-10);
  }
  CHECK_THROWS_AS(tikhonov_direct(g, DenoiseProblem{Signal::Zero(3), 1.0, 1, kShifted}), DimensionError);
}

TEST_CASE("ARMA Tikhonov limit equals the direct solve") {
  for (int n : {30, 100}) {
    const Graph g = geometric(n, 50u + static_cast<std::uint64_t>(n));
    const Signal t = random_signal(n, 9);
    for (int K : {1, 2}) {
      for (double w : {0.5, 1.0, 2.0}) {
        const auto d = tikhonov_design(w, K, kShifted);
        const Signal direct = tikhonov_direct(g, DenoiseProblem{t, w, K, kShifted});
        const double err = rel(arma_limit(g, d.coeffs, kShifted, t), direct);
        CHECK(err < 1e-7);
        if (K == 2 && w == 0.5) CHECK(err < 1e-8);
      }
    }
  }
}

TEST_CASE("Wiener special cases") {
  SUBCASE("pseudoinverse prior gives Tikhonov K = 1") {
    for (double w : {0.25, 1.0, 4.0}) {
      const WienerProblem p{SpectralRational{{1.0}, {0.0, 1.0}}, SpectralRational{{w}, {1.0}}, kShifted};
      const auto d = wiener_design(p);
      const auto t = tikhonov_design(w, 1, kShifted);
      REQUIRE(d.coeffs.order() == 1);
      CHECK(std::abs(d.coeffs.branches[0].psi - t.coeffs.branches[0].psi) < 1e-12);
      CHECK(std::abs(d.coeffs.branches[0].phi - t.coeffs.branches[0].phi) < 1e-12);
      CHECK(std::abs(d.coeffs.c - t.coeffs.c) < 1e-12);
    }
  }
  SUBCASE("no noise passes the signal through") {
    const WienerProblem p{SpectralRational{{1.0}, {1.0, 1.0}}, SpectralRational{{0.0}, {1.0}}, kShifted};
    const auto d = wiener_design(p);
    for (double mu : {-1.0, 0.0, 1.0}) CHECK(std::abs(response_static(d.coeffs, mu) - 1.0) < 1e-14);
  }
  SUBCASE("realized response equals the direct ratio") {
    const WienerProblem p{SpectralRational{{1.0}, {1.0, 1.0}}, SpectralRational{{0.5}, {1.0}}, kShifted};
    const auto d = wiener_design(p);
    for (double mu : uniform_grid(-1.0, 1.0, 11)) {
      CHECK(std::abs(response_static(d.coeffs, mu) - wiener_response(p, mu + 1.0)) < 1e-12);
    }
    CHECK(d.stability.stable);
  }
  SUBCASE("pole inside the band") {
    // sigma_x + sigma_n = 1/(1 - l) + 1 vanishes at l = 2, the upper band edge.
    const WienerProblem p{SpectralRational{{1.0}, {1.0, -1.0}}, SpectralRational{{1.0}, {1.0}}, kShifted};
    CHECK_THROWS_AS(wiener_design(p), PoleError);
  }
}

TEST_CASE("Wiener beats Tikhonov in mean squared error") {
  const Graph g = geometric(60, 12);
  const auto sd = spectral_decompose(build_laplacian(g, kNormalized));
  const WienerProblem p{SpectralRational{{1.0}, {1.0, 1.0}}, SpectralRational{{0.5}, {1.0}}, kShifted};
  const Response sx = [](double l) { return Complex(1.0 / (1.0 + l)); };
  const Response sn = [](double) { return Complex(0.5); };
  const Response wiener = [&](double l) { return wiener_response(p, l); };
  const double mse_w = denoise_mse_monte_carlo(sd, wiener, sx, sn, 200, 77);
  for (double w : {0.1, 0.5, 1.0, 2.0}) {
    const Response tik = [w](double l) { return Complex(1.0 / (1.0 + w * l)); };
    CHECK(mse_w <= denoise_mse_monte_carlo(sd, tik, sx, sn, 200, 77));
  }
}

TEST_CASE("interpolation") {
  SUBCASE("all observed, vanishing weight") {
    const Graph g = geometric(15, 4);
    InterpolationProblem p{std::vector<bool>(15, true), random_signal(15, 3), 1e-8, kNormalized};
    const auto r = interpolate(g, p);
    CHECK(r.rho < 1e-7);
    CHECK(rel(r.x, p.t) < 1e-7);
  }
  SUBCASE("one unknown node on a path") {
    const Graph g = path_graph(3);
    Signal t(3);
    t << 1.0, 0.0, 3.0;
    const LaplacianVariant discrete{LaplacianKind::discrete, std::nullopt};
    // At w = 0.5 the operator has eigenvalue 1 on (1, -1, 1): no convergence.
    CHECK_THROWS_AS(interpolate(g, InterpolationProblem{{true, false, true}, t, 0.5, discrete}), InvalidArgument);
    InterpolationProblem p{{true, false, true}, t, 0.25, discrete};
    // (S + wL) x = t written out for the path.
    Eigen::Matrix3d M;
    M << 1.25, -0.25, 0, -0.25, 0.5, -0.25, 0, -0.25, 1.25;
    const Eigen::Vector3d expected = M.ldlt().solve(Eigen::Vector3d(1.0, 0.0, 3.0));
    CHECK((interpolate_direct(g, p).real() - expected).norm() < 1e-12);
    const auto r = interpolate(g, p);
    CHECK((r.x.real() - expected).norm() < 1e-9);
    CHECK(r.trace.steady_round.has_value());
  }
  SUBCASE("smooth signal, half observed") {
    const Graph g = geometric(60, 8);
    const auto sd = spectral_decompose(build_laplacian(g, kNormalized));
    const Signal smooth = spectral_apply(sd, [](double l) { return Complex(std::exp(-3.0 * l)); }, random_signal(60, 4));
    std::vector<bool> obs(60);
    Signal t = Signal::Zero(60);
    for (int i = 0; i < 60; ++i) {
      obs[static_cast<std::size_t>(i)] = i % 2 == 0;
      if (i % 2 == 0) t[i] = smooth[i];
    }
    InterpolationProblem p{obs, t, 0.5, kNormalized};
    const auto r = interpolate(g, p, 200000, 1e-14);
    CHECK(r.rho < 1.0);
    CHECK(rel(r.x, interpolate_direct(g, p)) < 1e-7);
  }
  SUBCASE("observations are matched as the weight vanishes") {
    const Graph g = geometric(30, 9);
    std::vector<bool> obs(30);
    Signal t = Signal::Zero(30);
    const Signal x = random_signal(30, 5);
    for (int i = 0; i < 30; ++i) {
      obs[static_cast<std::size_t>(i)] = i % 3 != 0;
      if (i % 3 != 0) t[i] = x[i];
    }
    const double w = 1e-6;
    const Signal out = interpolate_direct(g, InterpolationProblem{obs, t, w, kNormalized});
    for (int i = 0; i < 30; ++i)
      if (obs[static_cast<std::size_t>(i)]) CHECK(std::abs(out[i] - t[i]) <= 10 * w * std::max(1.0, t.cwiseAbs().maxCoeff()));
  }
  SUBCASE("validation") {
    const Graph g = path_graph(3);
    CHECK_THROWS_AS(interpolate(g, InterpolationProblem{{false, false, false}, Signal::Zero(3)}), InvalidArgument);
    CHECK_THROWS_AS(interpolate(g, InterpolationProblem{{true, false}, Signal::Zero(3)}), DimensionError);
    Signal bad = Signal::Zero(3);
    bad[1] = 1.0;
    CHECK_THROWS_AS(interpolate(g, InterpolationProblem{{true, false, true}, bad}), InvalidArgument);
  }
}
