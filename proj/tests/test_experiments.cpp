#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "armagf/experiments.hpp"
#include "armagf/filters.hpp"
#include "support.hpp"

using namespace armagf;
using namespace armagf::testing;

namespace {

ExperimentConfig small(const std::string& id) {
  ExperimentConfig c = ExperimentConfig::defaults(id);
  c.n = 30;
  c.radius = 0.4;
  c.repetitions = 2;
  if (id == "fig5_denoise_tv") {
    c.rounds = 60;
    c.discard = 10;
  } else if (id == "fig7_lowpass_mobility") {
    c.orders = {2};
    c.fir_orders = {2};
    c.speeds = {0.0, 1.0};
    c.rounds = 40;
    c.discard = 10;
  } else if (id == "interference") {
    c.rounds = 120;
    c.discard = 40;
  }
  return c;
}

std::map<std::string, std::string> rendered(const ExperimentResult& r) {
  std::map<std::string, std::string> out;
  for (const auto& [k, v] : r.summary) out[k] = format_number(v);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("armagf_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST_CASE("format_number and derive_seed") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(std::nan("")) == "nan");
  CHECK(format_number(-std::numeric_limits<double>::infinity()) == "-inf");
  CHECK(derive_seed(1, 2, 3) == derive_seed(1, 2, 3));
  CHECK(derive_seed(1, 2, 3) != derive_seed(1, 3, 2));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
}

TEST_CASE("config parsing and validation") {
  CHECK_THROWS_AS(ExperimentConfig::defaults("fig9"), InvalidArgument);
  CHECK_THROWS_AS(ExperimentConfig::from_json("{"), InvalidArgument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"n": 5})"), InvalidArgument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"experiment": "fig1_responses", "colour": 1})"),
                  InvalidArgument);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json(R"({"experiment": "fig5_denoise_tv", "dynamics": {"q": 0.1}})"),
      InvalidArgument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"experiment": "fig1_responses", "n": "many"})"),
                  InvalidArgument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"experiment": "fig1_responses", "n": 1})"),
                  InvalidArgument);
  CHECK_THROWS_AS(ExperimentConfig::from_json(R"({"experiment": "fig1_responses", "cutoff": 2.0})"),
                  InvalidArgument);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json(R"({"experiment": "fig5_denoise_tv", "fir_basis": "discrete"})"),
      InvalidArgument);
  CHECK_THROWS_AS(
      ExperimentConfig::from_json(R"({"experiment": "fig1_responses", "graph_file": "/no/such/file"})"),
      InvalidArgument);

  const auto c = ExperimentConfig::from_json(
      R"({"experiment": "fig5_denoise_tv", "n": 40, "seed": 9,
          "fir_basis": "shifted_normalized", "dynamics": {"p": 0.2}})");
  CHECK(c.n == 40);
  CHECK(c.seed == 9);
  CHECK(c.fir_basis == LaplacianKind::shifted_normalized);
  CHECK(c.dynamics.p == doctest::Approx(0.2));
  CHECK(c.dynamics.kind == DynamicsKind::edge_failure);
  CHECK(c.fir_orders == std::vector<int>{1, 3, 5});
}

TEST_CASE("response_error matches the closed-form mismatch on a static graph") {
  const Graph g = geometric(30, 4);
  const auto sd = spectral_decompose(build_laplacian(g, {LaplacianKind::shifted_normalized, std::nullopt}));
  const auto coeffs = arma1(-0.4, 0.7);
  const Signal x = random_signal(30, 5);
  const Signal y = spectral_apply(sd, [&](double mu) { return response_static(coeffs, mu); }, x);

  const Response same = [&](double mu) { return response_static(coeffs, mu); };
  CHECK(response_error(sd, x, y, same) < 1e-12);

  const Response target = [](double mu) { return Complex(mu < -0.5 ? 1.0 : 0.0); };
  double num = 0.0, den = 0.0;
  for (Eigen::Index n = 0; n < sd.size(); ++n) {
    const double mu = sd.eigenvalues[n];
    num += std::norm(response_static(coeffs, mu) - target(mu));
    den += std::norm(target(mu));
  }
  CHECK(response_error(sd, x, y, target) == doctest::Approx(std::sqrt(num / den)).epsilon(1e-6));

  const Response zero = [](double) { return Complex(0.0); };
  CHECK(std::isnan(response_error(sd, x, y, zero)));
  CHECK(filtering_error(2.0 * x, x) == doctest::Approx(1.0));
}

TEST_CASE("every experiment runs at small scale and is deterministic") {
  for (const char* id : {"fig1_responses", "fig2_denoise_convergence", "interference", "fig5_denoise_tv",
                         "fig7_lowpass_mobility"}) {
    CAPTURE(id);
    const ExperimentConfig cfg = small(id);
    const ExperimentResult a = run_experiment(cfg);
    const ExperimentResult b = run_experiment(cfg);
    CHECK(a.experiment == id);
    CHECK_FALSE(a.tables.empty());
    CHECK(rendered(a) == rendered(b));
    CHECK(a.summary.at("n") == 30);
  }
}

TEST_CASE("different seeds give different realizations") {
  ExperimentConfig cfg = small("fig5_denoise_tv");
  const double first = run_experiment(cfg).summary.at("avg_error_arma1");
  cfg.seed = 2;
  CHECK(run_experiment(cfg).summary.at("avg_error_arma1") != first);
}

TEST_CASE("time-varying denoising static control") {
  const ExperimentResult r = run_experiment(small("fig5_denoise_tv"));
  CHECK(r.summary.at("static_remark_gap") < 1e-8);
  CHECK(r.summary.at("static_limit_error") < 1e-8);
  CHECK(r.summary.count("avg_error_fir_K5"));
}

TEST_CASE("denoising FIR basis switch only moves the FIR columns") {
  ExperimentConfig cfg = small("fig5_denoise_tv");
  const ExperimentResult a = run_experiment(cfg);
  cfg.fir_basis = LaplacianKind::shifted_normalized;
  const ExperimentResult b = run_experiment(cfg);
  CHECK(a.summary.at("avg_error_arma1") == b.summary.at("avg_error_arma1"));
  // Order 1 taps fit a line, which is the same function in either basis.
  CHECK(a.summary.at("avg_error_fir_K1") == doctest::Approx(b.summary.at("avg_error_fir_K1")).epsilon(1e-9));
  CHECK(a.summary.at("avg_error_fir_K3") != doctest::Approx(b.summary.at("avg_error_fir_K3")));
}

TEST_CASE("mobility campaign at zero speed reproduces the design residual") {
  const ExperimentResult r = run_experiment(small("fig7_lowpass_mobility"));
  CHECK(r.summary.at("static_gap_K2") < 1e-3);
  CHECK(r.summary.count("arma_mean_K2_v1"));
  CHECK(r.summary.count("fir_mean_K2_v0"));
}

TEST_CASE("emit_plot_data writes csv, documents and summary") {
  ExperimentResult r;
  r.experiment = "fig1_responses";
  r.summary = {{"a", 1.0 / 3.0}, {"b", std::nan("")}};
  r.tables = {Table{"full", {"x", "y"}, {{1.0, 2.5}, {2.0, -1e-20}}}, Table{"empty", {"t", "v"}, {}}};
  r.documents["coeffs.json"] = "{}";
  r.notes = {"one \"quoted\" note"};
  const auto dir = scratch("emit");
  emit_plot_data(r, dir.string());

  CHECK(slurp(dir / "full.csv") == "x,y\n1,2.5\n2,-1e-20\n");
  CHECK(slurp(dir / "empty.csv") == "t,v\n");
  CHECK(slurp(dir / "coeffs.json") == "{}\n");
  const std::string j = slurp(dir / "summary.json");
  CHECK(j.find("\"a\": 0.333333333333") != std::string::npos);
  CHECK(j.find("\"b\": \"nan\"") != std::string::npos);
  CHECK(j.find("one \\\"quoted\\\" note") != std::string::npos);

  // Reruns are byte-identical.
  const auto again = scratch("emit_again");
  emit_plot_data(r, again.string());
  CHECK(slurp(again / "summary.json") == slurp(dir / "summary.json"));
  std::filesystem::remove_all(dir);
  std::filesystem::remove_all(again);
}

TEST_CASE("experiment output directory errors") {
  ExperimentResult r;
  r.experiment = "fig1_responses";
  const auto blocker = scratch("blocker");
  std::ofstream(blocker.string()) << "file";
  CHECK_THROWS_AS(emit_plot_data(r, (blocker / "sub").string()), Error);
  std::filesystem::remove_all(blocker);
}
