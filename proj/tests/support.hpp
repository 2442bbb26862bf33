#pragma once

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "armagf/dynamics.hpp"
#include "armagf/graph.hpp"

namespace armagf::testing {

inline Graph path_graph(int n) {
  std::vector<Edge> e;
  for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1, 1.0});
  return Graph(n, e);
}

inline Graph cycle_graph(int n) {
  std::vector<Edge> e;
  for (int i = 0; i < n; ++i) e.push_back({i, (i + 1) % n, 1.0});
  return Graph(n, e);
}

inline Graph geometric(int n, std::uint64_t seed) {
  // Small graphs need a larger radius to be connected with reasonable odds.
  const double r = std::max(default_connection_radius(), std::sqrt(3.0 * std::log(n + 1.0) / n));
  return random_geometric_graph(n, r, seed).graph;
}

inline Signal random_signal(Eigen::Index n, std::uint64_t seed, bool complex = false) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Signal x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = Complex(normal(rng), complex ? normal(rng) : 0.0);
  return x;
}

/// Laplacian built entry by entry from the adjacency matrix.
inline Eigen::MatrixXd dense_laplacian(const Graph& g, bool normalized, double shift = 0.0) {
  const int n = g.num_nodes();
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
  for (const Edge& e : g.edges()) A(e.i, e.j) = A(e.j, e.i) = e.weight;
  const Eigen::VectorXd d = A.rowwise().sum();
  Eigen::MatrixXd L = Eigen::MatrixXd(d.asDiagonal()) - A;
  if (normalized) {
    Eigen::VectorXd s(n);
    for (int i = 0; i < n; ++i) s[i] = d[i] > 0 ? 1.0 / std::sqrt(d[i]) : 0.0;
    L = s.asDiagonal() * L * s.asDiagonal();
  }
  return L - shift * Eigen::MatrixXd::Identity(n, n);
}

inline double rel(const Signal& a, const Signal& b) {
  return (a - b).norm() / std::max(1e-300, b.norm());
}

}  // namespace armagf::testing

#include "armagf/filters.hpp"

namespace armagf::testing {

/// Published residue/pole sets for the step design on the shifted normalized
/// Laplacian (c = 0). The K = 5 rows as printed are not conjugate-closed;
/// the pairs below keep the printed values and restore conjugate symmetry.
struct PublishedDesign {
  std::vector<Complex> residues;
  std::vector<Complex> poles;

  ArmaParallelCoefficients parallel() const {
    ArmaParallelCoefficients p;
    for (std::size_t k = 0; k < poles.size(); ++k) p.branches.push_back({1.0 / poles[k], -residues[k] / poles[k]});
    return p;
  }
};

inline PublishedDesign published_k3() {
  return {{{10.954, 0}, {1.275, 1.005}, {1.275, -1.005}}, {{-6.666, 0}, {0.202, 1.398}, {0.202, -1.398}}};
}

inline PublishedDesign published_k5() {
  return {{{-7.025, 0}, {-1.884, -1.298}, {-1.884, 1.298}, {1.433, -1.568}, {1.433, 1.568}},
          {{-3.674, 0}, {-0.420, 1.269}, {-0.420, -1.269}, {0.703, 1.129}, {0.703, -1.129}}};
}

}  // namespace armagf::testing
