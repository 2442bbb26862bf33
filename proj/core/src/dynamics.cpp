#include "armagf/dynamics.hpp"

#include <cmath>
#include <string>

namespace armagf {

Graph proximity_graph(std::span<const Point> points, double radius) {
  std::vector<Edge> edges;
  const double r2 = radius * radius;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      const double dx = points[i].x - points[j].x;
      const double dy = points[i].y - points[j].y;
      if (dx * dx + dy * dy < r2) edges.push_back({static_cast<int>(i), static_cast<int>(j), 1.0});
    }
  }
  return Graph(static_cast<int>(points.size()), std::move(edges));
}

GeometricGraph random_geometric_graph(int n, double radius, std::uint64_t seed, double side,
                                      int max_attempts) {
  if (n < 1) throw InvalidArgument("geometric graph needs at least one node");
  if (!(radius > 0.0) || !(side > 0.0)) throw InvalidArgument("radius and side must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, side);
  for (int attempt = 0; attempt < max_attempts; ++attempt) {
    std::vector<Point> pts(static_cast<std::size_t>(n));
    for (auto& p : pts) {
      p.x = coord(rng);
      p.y = coord(rng);
    }
    Graph g = proximity_graph(pts, radius);
    if (g.is_connected()) return {std::move(g), std::move(pts)};
  }
  throw NumericalError("no connected geometric graph after " + std::to_string(max_attempts) +
                       " attempts");
}

DynamicsKind parse_dynamics_kind(std::string_view name) {
  if (name == "static") return DynamicsKind::static_graph;
  if (name == "edge_failure") return DynamicsKind::edge_failure;
  if (name == "random_waypoint") return DynamicsKind::random_waypoint;
  throw InvalidArgument("unknown dynamics kind '" + std::string(name) + "'");
}

std::string_view to_string(DynamicsKind kind) {
  switch (kind) {
    case DynamicsKind::static_graph: return "static";
    case DynamicsKind::edge_failure: return "edge_failure";
    case DynamicsKind::random_waypoint: return "random_waypoint";
  }
  throw InvalidArgument("unknown dynamics kind");
}

void DynamicsConfig::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("edge failure probability must lie in [0, 1]");
  if (kind == DynamicsKind::random_waypoint) {
    if (!(area > 0.0)) throw InvalidArgument("waypoint area must be positive");
    if (!(range > 0.0)) throw InvalidArgument("communication range must be positive");
    if (!(vmin >= 0.0) || !(vmin <= vmax)) throw InvalidArgument("need 0 <= vmin <= vmax");
  }
}

GraphDynamics::GraphDynamics(DynamicsConfig config, Graph base, std::vector<Point> positions)
    : config_(config), base_(std::move(base)), current_(base_), positions_(std::move(positions)),
      rng_(config.seed) {
  config_.validate();
  if (config_.kind != DynamicsKind::random_waypoint) return;
  const double side = std::sqrt(config_.area);
  const auto n = static_cast<std::size_t>(base_.num_nodes());
  if (positions_.empty()) {
    std::uniform_real_distribution<double> coord(0.0, side);
    positions_.resize(n);
    for (auto& p : positions_) {
      p.x = coord(rng_);
      p.y = coord(rng_);
    }
  } else if (positions_.size() != n) {
    throw DimensionError("one position per node is required");
  }
  targets_.resize(n);
  speeds_.resize(n);
  for (std::size_t i = 0; i < n; ++i) draw_leg(i);
  current_ = proximity_graph(positions_, config_.range);
}

void GraphDynamics::draw_leg(std::size_t node) {
  const double side = std::sqrt(config_.area);
  std::uniform_real_distribution<double> coord(0.0, side);
  std::uniform_real_distribution<double> speed(config_.vmin, config_.vmax);
  targets_[node] = {coord(rng_), coord(rng_)};
  speeds_[node] = speed(rng_);
}

const Graph& GraphDynamics::next(double dt) {
  switch (config_.kind) {
    case DynamicsKind::static_graph:
      break;
    case DynamicsKind::edge_failure: {
      std::bernoulli_distribution fail(config_.p);
      std::vector<Edge> kept;
      kept.reserve(base_.num_edges());
      for (const Edge& e : base_.edges()) {
        if (!fail(rng_)) kept.push_back(e);
      }
      current_ = Graph(base_.num_nodes(), std::move(kept));
      break;
    }
    case DynamicsKind::random_waypoint: {
      for (std::size_t i = 0; i < positions_.size(); ++i) {
        double remaining = dt;
        double budget = speeds_[i] * remaining;
        // A node that reaches its waypoint continues towards a fresh one.
        for (int legs = 0; budget > 0.0 && legs < 16; ++legs) {
          const double dx = targets_[i].x - positions_[i].x;
          const double dy = targets_[i].y - positions_[i].y;
          const double dist = std::hypot(dx, dy);
          if (dist > budget) {
            positions_[i].x += dx / dist * budget;
            positions_[i].y += dy / dist * budget;
            break;
          }
          positions_[i] = targets_[i];
          remaining = std::max(0.0, remaining - (speeds_[i] > 0.0 ? dist / speeds_[i] : remaining));
          draw_leg(i);
          budget = speeds_[i] * remaining;
        }
      }
      current_ = proximity_graph(positions_, config_.range);
      break;
    }
  }
  return current_;
}

}  // namespace armagf
