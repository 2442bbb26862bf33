#pragma once

#include <complex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "armagf/error.hpp"

namespace armagf {

using Complex = std::complex<double>;
/// One complex value per node.
using Signal = Eigen::VectorXcd;
/// Symmetric, local graph operator (a Laplacian variant or a derived basis).
using Operator = Eigen::SparseMatrix<double>;

struct Edge {
  int i = 0;
  int j = 0;
  double weight = 1.0;
};

/// Undirected weighted graph. Each edge is stored once; self-loops and
/// duplicate node pairs are rejected.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n_nodes, std::vector<Edge> edges = {});

  int num_nodes() const noexcept { return n_nodes_; }
  std::size_t num_edges() const noexcept { return edges_.size(); }
  const std::vector<Edge>& edges() const noexcept { return edges_; }

  /// Weighted degree of every node.
  Eigen::VectorXd degrees() const;
  double max_degree() const;
  bool is_connected() const;

 private:
  int n_nodes_ = 0;
  std::vector<Edge> edges_;
};

enum class LaplacianKind { discrete, normalized, shifted_discrete, shifted_normalized };

LaplacianKind parse_laplacian_kind(std::string_view name);
std::string_view to_string(LaplacianKind kind);

/// Uniform bounds on the spectrum of every admitted operator.
struct SpectralBounds {
  double lambda_min = 0.0;
  double lambda_max = 0.0;

  /// Spectral radius bound: max(|lambda_min|, |lambda_max|).
  double rho() const;
  bool contains(double lambda, double slack = 0.0) const {
    return lambda >= lambda_min - slack && lambda <= lambda_max + slack;
  }
};

/// Which Laplacian to build, and the degree bound `l` used by the discrete
/// variants. When `l` is unset it resolves to twice the maximum weighted
/// degree of the graph, which bounds the discrete spectrum.
struct LaplacianVariant {
  LaplacianKind kind = LaplacianKind::shifted_normalized;
  std::optional<double> l;

  bool is_shifted() const noexcept {
    return kind == LaplacianKind::shifted_discrete || kind == LaplacianKind::shifted_normalized;
  }
  bool is_discrete() const noexcept {
    return kind == LaplacianKind::discrete || kind == LaplacianKind::shifted_discrete;
  }
  /// The `l` actually used on graph `g`.
  double degree_bound(const Graph& g) const;
  /// Amount subtracted from the diagonal (l/2, 1 or 0).
  double shift(const Graph& g) const;
  /// Copy with `l` fixed to the value that `g` implies.
  LaplacianVariant resolved(const Graph& g) const;

  SpectralBounds bounds(const Graph& g) const;
  /// Bounds without a graph; discrete variants need `l` to be set.
  SpectralBounds bounds() const;
  /// The same family without the diagonal shift.
  LaplacianVariant unshifted() const;
};

Operator build_laplacian(const Graph& g, const LaplacianVariant& variant);

/// Eigenpairs of a symmetric operator, eigenvalues ascending.
struct SpectralDecomposition {
  Eigen::VectorXd eigenvalues;
  Eigen::MatrixXd eigenvectors;  ///< column n is phi_n

  Eigen::Index size() const noexcept { return eigenvalues.size(); }
};

/// Dense symmetric eigendecomposition with a deterministic basis: the first
/// component above 1e-12 in magnitude of every eigenvector is positive, and
/// eigenvectors of (numerically) repeated eigenvalues are ordered
/// lexicographically.
SpectralDecomposition spectral_decompose(const Eigen::MatrixXd& L);
SpectralDecomposition spectral_decompose(const Operator& L);

Signal gft(const SpectralDecomposition& sd, const Signal& x);
Signal igft(const SpectralDecomposition& sd, const Signal& x_hat);

/// `n` evenly spaced points over [lo, hi], both ends included.
std::vector<double> uniform_grid(double lo, double hi, int n);
inline constexpr int kDefaultGridSize = 500;

/// Number of undirected edges carried by an operator (off-diagonal nonzeros / 2).
std::size_t operator_edge_count(const Operator& L);

/// Real part of a signal whose imaginary part should cancel. Throws
/// NumericalError when ||imag|| exceeds tol * ||x||.
Eigen::VectorXd real_part_checked(const Signal& x, double tol = 1e-9);

/// ||x|| for complex vectors; small helper used across modules.
inline double norm(const Signal& x) { return x.norm(); }

}  // namespace armagf
