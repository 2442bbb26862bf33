#include "armagf/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <utility>

#include <Eigen/Eigenvalues>

namespace armagf {

DivergenceError::DivergenceError(long round, std::size_t branch, double norm)
    : Error([&] {
        std::ostringstream os;
        os << "recursion diverged at round " << round << " (branch " << branch
           << ", state norm " << norm << ")";
        return os.str();
      }()),
      round_(round),
      branch_(branch),
      norm_(norm) {}

Graph::Graph(int n_nodes, std::vector<Edge> edges) : n_nodes_(n_nodes), edges_(std::move(edges)) {
  if (n_nodes_ <= 0) throw InvalidArgument("graph needs at least one node");
  std::set<std::pair<int, int>> seen;
  for (const Edge& e : edges_) {
    if (e.i < 0 || e.j < 0 || e.i >= n_nodes_ || e.j >= n_nodes_) {
      throw InvalidArgument("edge endpoint out of range: (" + std::to_string(e.i) + ", " +
                            std::to_string(e.j) + ")");
    }
    if (e.i == e.j) throw InvalidArgument("self-loop on node " + std::to_string(e.i));
    if (!std::isfinite(e.weight)) throw InvalidArgument("non-finite edge weight");
    if (!seen.emplace(std::min(e.i, e.j), std::max(e.i, e.j)).second) {
      throw InvalidArgument("duplicate edge (" + std::to_string(e.i) + ", " +
                            std::to_string(e.j) + ")");
    }
  }
}

Eigen::VectorXd Graph::degrees() const {
  Eigen::VectorXd d = Eigen::VectorXd::Zero(n_nodes_);
  for (const Edge& e : edges_) {
    d[e.i] += e.weight;
    d[e.j] += e.weight;
  }
  return d;
}

double Graph::max_degree() const { return n_nodes_ == 0 ? 0.0 : degrees().maxCoeff(); }

bool Graph::is_connected() const {
  std::vector<int> parent(n_nodes_);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v] = parent[parent[v]];
    return v;
  };
  int components = n_nodes_;
  for (const Edge& e : edges_) {
    int a = find(e.i), b = find(e.j);
    if (a != b) {
      parent[a] = b;
      --components;
    }
  }
  return components == 1;
}

LaplacianKind parse_laplacian_kind(std::string_view name) {
  if (name == "discrete") return LaplacianKind::discrete;
  if (name == "normalized") return LaplacianKind::normalized;
  if (name == "shifted_discrete") return LaplacianKind::shifted_discrete;
  if (name == "shifted_normalized") return LaplacianKind::shifted_normalized;
  throw InvalidArgument("unknown Laplacian variant '" + std::string(name) + "'");
}

std::string_view to_string(LaplacianKind kind) {
  switch (kind) {
    case LaplacianKind::discrete: return "discrete";
    case LaplacianKind::normalized: return "normalized";
    case LaplacianKind::shifted_discrete: return "shifted_discrete";
    case LaplacianKind::shifted_normalized: return "shifted_normalized";
  }
  throw InvalidArgument("unknown Laplacian variant");
}

double SpectralBounds::rho() const { return std::max(std::abs(lambda_min), std::abs(lambda_max)); }

double LaplacianVariant::degree_bound(const Graph& g) const {
  if (l) return *l;
  return 2.0 * g.max_degree();
}

double LaplacianVariant::shift(const Graph& g) const {
  switch (kind) {
    case LaplacianKind::shifted_discrete: return degree_bound(g) / 2.0;
    case LaplacianKind::shifted_normalized: return 1.0;
    default: return 0.0;
  }
}

LaplacianVariant LaplacianVariant::resolved(const Graph& g) const {
  LaplacianVariant v = *this;
  if (is_discrete()) v.l = degree_bound(g);
  return v;
}

SpectralBounds LaplacianVariant::bounds(const Graph& g) const { return resolved(g).bounds(); }

SpectralBounds LaplacianVariant::bounds() const {
  switch (kind) {
    case LaplacianKind::normalized: return {0.0, 2.0};
    case LaplacianKind::shifted_normalized: return {-1.0, 1.0};
    case LaplacianKind::discrete:
    case LaplacianKind::shifted_discrete: {
      if (!l) throw InvalidArgument("discrete Laplacian bounds need the degree bound l");
      if (kind == LaplacianKind::discrete) return {0.0, *l};
      return {-*l / 2.0, *l / 2.0};
    }
  }
  throw InvalidArgument("unknown Laplacian variant");
}

LaplacianVariant LaplacianVariant::unshifted() const {
  LaplacianVariant v = *this;
  if (kind == LaplacianKind::shifted_discrete) v.kind = LaplacianKind::discrete;
  if (kind == LaplacianKind::shifted_normalized) v.kind = LaplacianKind::normalized;
  return v;
}

Operator build_laplacian(const Graph& g, const LaplacianVariant& variant) {
  const int n = g.num_nodes();
  const Eigen::VectorXd deg = g.degrees();
  const bool normalized =
      variant.kind == LaplacianKind::normalized || variant.kind == LaplacianKind::shifted_normalized;
  if (variant.kind == LaplacianKind::shifted_discrete && !(variant.degree_bound(g) > 0.0)) {
    throw InvalidArgument("shifted_discrete Laplacian needs l > 0");
  }
  const double shift = variant.shift(g);

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * g.num_edges() + static_cast<std::size_t>(n));
  for (const Edge& e : g.edges()) {
    double value = -e.weight;
    if (normalized) {
      if (!(deg[e.i] > 0.0 && deg[e.j] > 0.0)) {
        throw InvalidArgument("normalized Laplacian needs positive degrees");
      }
      value /= std::sqrt(deg[e.i] * deg[e.j]);
    }
    triplets.emplace_back(e.i, e.j, value);
    triplets.emplace_back(e.j, e.i, value);
  }
  for (int i = 0; i < n; ++i) {
    double diag = normalized ? (deg[i] > 0.0 ? 1.0 : 0.0) : deg[i];
    diag -= shift;
    if (diag != 0.0) triplets.emplace_back(i, i, diag);
  }
  Operator L(n, n);
  L.setFromTriplets(triplets.begin(), triplets.end());
  L.makeCompressed();
  return L;
}

namespace {

void check_symmetric(const Eigen::MatrixXd& L) {
  if (L.rows() != L.cols()) throw DimensionError("operator is not square");
  const double scale = std::max(L.norm(), 1.0);
  if ((L - L.transpose()).norm() > 1e-12 * scale) {
    throw InvalidArgument("operator is not symmetric");
  }
}

}  // namespace

SpectralDecomposition spectral_decompose(const Eigen::MatrixXd& L) {
  check_symmetric(L);
  const Eigen::MatrixXd sym = 0.5 * (L + L.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sym);
  if (solver.info() != Eigen::Success) throw NumericalError("symmetric eigensolver failed");

  SpectralDecomposition sd{solver.eigenvalues(), solver.eigenvectors()};
  const Eigen::Index n = sd.size();
  for (Eigen::Index c = 0; c < n; ++c) {
    auto v = sd.eigenvectors.col(c);
    for (Eigen::Index r = 0; r < n; ++r) {
      if (std::abs(v[r]) > 1e-12) {
        if (v[r] < 0) v = -v;
        break;
      }
    }
  }

  // Repeated eigenvalues: order their eigenvectors lexicographically.
  const double tol = 1e-10 * std::max(1.0, sd.eigenvalues.cwiseAbs().maxCoeff());
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index stop = start + 1;
    while (stop < n && sd.eigenvalues[stop] - sd.eigenvalues[stop - 1] <= tol) ++stop;
    if (stop - start > 1) {
      std::vector<Eigen::Index> order(static_cast<std::size_t>(stop - start));
      std::iota(order.begin(), order.end(), start);
      const Eigen::MatrixXd block = sd.eigenvectors.middleCols(start, stop - start);
      std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        const auto va = block.col(a - start);
        const auto vb = block.col(b - start);
        for (Eigen::Index r = 0; r < n; ++r) {
          if (std::abs(va[r] - vb[r]) > 1e-12) return va[r] > vb[r];
        }
        return false;
      });
      for (Eigen::Index k = 0; k < stop - start; ++k) {
        sd.eigenvectors.col(start + k) = block.col(order[static_cast<std::size_t>(k)] - start);
      }
    }
    start = stop;
  }
  return sd;
}

SpectralDecomposition spectral_decompose(const Operator& L) {
  return spectral_decompose(Eigen::MatrixXd(L));
}

Signal gft(const SpectralDecomposition& sd, const Signal& x) {
  if (x.size() != sd.size()) throw DimensionError("gft: signal length does not match basis");
  return sd.eigenvectors.transpose().cast<Complex>() * x;
}

Signal igft(const SpectralDecomposition& sd, const Signal& x_hat) {
  if (x_hat.size() != sd.size()) throw DimensionError("igft: coefficient length does not match basis");
  return sd.eigenvectors.cast<Complex>() * x_hat;
}

std::vector<double> uniform_grid(double lo, double hi, int n) {
  if (n < 1) throw InvalidArgument("grid needs at least one point");
  if (n == 1) return {lo};
  std::vector<double> grid(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) grid[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  grid.back() = hi;
  return grid;
}

Eigen::VectorXd real_part_checked(const Signal& x, double tol) {
  const double im = x.imag().norm();
  if (im > tol * x.norm()) {
    std::ostringstream os;
    os << "imaginary residue " << im << " exceeds tolerance for a real output";
    throw NumericalError(os.str());
  }
  return x.real();
}

std::size_t operator_edge_count(const Operator& L) {
  std::size_t off_diagonal = 0;
  for (Eigen::Index k = 0; k < L.outerSize(); ++k) {
    for (Operator::InnerIterator it(L, k); it; ++it) {
      if (it.row() != it.col() && it.value() != 0.0) ++off_diagonal;
    }
  }
  return off_diagonal / 2;
}

}  // namespace armagf
