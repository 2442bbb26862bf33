#pragma once

#include <cstdint>
#include <cmath>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "armagf/graph.hpp"

namespace armagf {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

/// Edges between every pair of points closer than `radius` (unit weights).
Graph proximity_graph(std::span<const Point> points, double radius);

struct GeometricGraph {
  Graph graph;
  std::vector<Point> positions;
};

/// `n` points uniform in a square of side `side`, connected within `radius`.
/// Resamples until the graph is connected, at most `max_attempts` times.
GeometricGraph random_geometric_graph(int n, double radius, std::uint64_t seed, double side = 1.0,
                                      int max_attempts = 100);

/// Default connection radius: 15% of the square's diagonal.
inline double default_connection_radius(double side = 1.0) { return 0.15 * side * std::sqrt(2.0); }

enum class DynamicsKind { static_graph, edge_failure, random_waypoint };
DynamicsKind parse_dynamics_kind(std::string_view name);
std::string_view to_string(DynamicsKind kind);

struct DynamicsConfig {
  DynamicsKind kind = DynamicsKind::static_graph;
  double p = 0.0;         ///< edge failure probability per round
  double area = 1.0e6;    ///< square area in m^2
  double range = 180.0;   ///< communication range in m
  double vmin = 0.0;      ///< m/s
  double vmax = 3.0;      ///< m/s
  std::uint64_t seed = 1;

  void validate() const;
};

/// Seeded generator of graph realizations. `next` advances one round.
class GraphDynamics {
 public:
  /// Edge failures drop edges of `base`. Random waypoint moves `positions`
  /// (drawn uniformly when empty) and rebuilds edges within range.
  GraphDynamics(DynamicsConfig config, Graph base, std::vector<Point> positions = {});

  const Graph& current() const noexcept { return current_; }
  const std::vector<Point>& positions() const noexcept { return positions_; }
  const DynamicsConfig& config() const noexcept { return config_; }

  const Graph& next(double dt = 1.0);

 private:
  void draw_leg(std::size_t node);

  DynamicsConfig config_;
  Graph base_;
  Graph current_;
  std::vector<Point> positions_;
  std::vector<Point> targets_;
  std::vector<double> speeds_;
  std::mt19937_64 rng_;
};

}  // namespace armagf
