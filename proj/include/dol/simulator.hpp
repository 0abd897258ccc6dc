// Copyright 2026 The Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Synthetic UGV/UAV world: road graph, Weibull wind, a wind-aware multirotor
// energy model, persistent circular UAV missions with a low-battery landing
// policy, candidate UGV route generation and selection scoring.
//
// Units: meters, seconds, joules, degrees for directions.

#ifndef DOL_SIMULATOR_HPP_
#define DOL_SIMULATOR_HPP_

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "dol/common.hpp"
#include "dol/submodular.hpp"
#include "json.hpp"

namespace dol {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

struct Edge {
  NodeId u = 0;
  NodeId v = 0;
  double length = 0.0;
};

// Undirected road network. Node ids are indices into `nodes`.
class RoadGraph {
 public:
  RoadGraph() = default;
  // Edge lengths are the Euclidean distances of the endpoints.
  RoadGraph(std::vector<Point> nodes, std::vector<std::pair<NodeId, NodeId>> edges,
            NodeId depot);

  // A grid of rows x cols nodes with the given spacing and 4-neighbour roads.
  static RoadGraph grid(std::size_t rows, std::size_t cols, double spacing, NodeId depot);

  std::size_t size() const { return nodes_.size(); }
  const std::vector<Point>& nodes() const { return nodes_; }
  const std::vector<Edge>& edges() const { return edges_; }
  Point position(NodeId v) const { return nodes_.at(static_cast<std::size_t>(v)); }
  NodeId depot() const { return depot_; }
  // Neighbour ids in ascending order.
  const std::vector<NodeId>& neighbors(NodeId v) const {
    return adjacency_.at(static_cast<std::size_t>(v));
  }
  bool has_edge(NodeId u, NodeId v) const;

  // Connectivity of the subgraph induced by nodes with alive[v] true.
  bool connected(const std::vector<bool>& alive) const;
  bool connected() const { return connected(std::vector<bool>(size(), true)); }

  // Closest node to p; ties go to the lowest id.
  NodeId nearest_node(Point p) const;

  // Shortest-path distances and predecessors from `source` within the alive
  // subgraph. Unreachable nodes get infinity and predecessor -1.
  void shortest_paths(NodeId source, const std::vector<bool>& alive, std::vector<double>& dist,
                      std::vector<NodeId>& pred) const;

  // Throws InvalidArgument if lengths, ids, depot or connectivity are invalid.
  void validate() const;

 private:
  std::vector<Point> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<NodeId>> adjacency_;
  NodeId depot_ = 0;
};

// Wind speed distribution and direction. The density is
//   p(x) = (b / a) (x / a)^(b - 1) exp(-(x / a)^b),  x >= 0,
// with a in the scale position and b in the exponent, as in the appendix
// formula. The prose there calls a the shape and b the scale.
struct WindField {
  double a = 3.0;
  double b = 2.0;
  double omega_o = 0.0;  // direction the wind is measured against, degrees

  void validate() const;
};

double weibull_pdf(double x, const WindField& field);
double weibull_cdf(double x, const WindField& field);
// Inverse-CDF draw a (-ln u)^(1/b).
double weibull_sample(const WindField& field, Rng& rng);

struct EnergyParams {
  double mass = 2.0;         // kg
  double g = 9.81;           // m/s^2
  double rho = 1.225;        // kg/m^3
  double area = 0.2;         // m^2
  double drag_coeff = 1.0;

  void validate() const;
};

// Direction of the vector from u to v in degrees, in [0, 360).
double edge_direction(Point u, Point v);
// (omega_o - psi) normalized to [0, 360).
double relative_wind_direction(double omega_o, double psi);
// Airspeed for ground speed s_d, wind speed omega_s and relative direction theta.
double airspeed(double s_d, double omega_s, double theta_deg);

struct InducedVelocity {
  double value = 0.0;
  double residual = 0.0;  // |value - s_h^2 / sqrt((s_d cos a)^2 + (s_d sin a + value)^2)|
  std::size_t iterations = 0;
};

// Solves s_i = s_h^2 / sqrt((s_d cos a)^2 + (s_d sin a + s_i)^2) with
// s_h = sqrt(T / (2 rho A)) by fixed-point iteration from s_h. Falls back to
// bisection if the iteration has not settled after 1000 steps. Throws
// RuntimeError if the returned residual is not below 1e-8.
InducedVelocity induced_velocity(double thrust, double s_d, double alpha_pitch, double rho,
                                 double area);

// Every intermediate of the per-distance energy computation.
struct EnergyBreakdown {
  double airspeed = 0.0;
  double drag = 0.0;
  double thrust = 0.0;
  double alpha_pitch = 0.0;  // radians
  double induced = 0.0;
  double induced_residual = 0.0;
  double power = 0.0;
  double mu = 0.0;  // J/m
};

EnergyBreakdown energy_per_distance(double s_d, double omega_s, double theta_deg,
                                    const EnergyParams& params);

// mu * length for a straight leg from `from` to `to`.
double edge_energy(Point from, Point to, double omega_s, double omega_o, double s_d,
                   const EnergyParams& params);

struct UavSpec {
  Point center;
  double radius = 100.0;
  std::size_t waypoint_count = 12;
  double speed = 10.0;               // s_d, m/s
  double battery_capacity = 6.0e4;   // J
  double recharge_threshold = 0.30;  // fraction of capacity

  void validate() const;
  // Waypoints evenly spaced on the circle, the first at angle 0.
  std::vector<Point> waypoints() const;
};

struct Landing {
  NodeId node = 0;
  double time = 0.0;
  bool forced = false;  // the divert leg could not be covered by the remaining charge
};

struct UavMission {
  std::vector<Landing> landings;
  std::vector<double> wind_speeds;  // one draw per flown leg, in order
};

// Flies the circle for `duration` seconds. Before every leg the wind speed
// is drawn; if the leg would leave less than the threshold charge the UAV
// instead flies straight to the nearest road node, lands, recharges fully
// and then continues to the waypoint it was heading for.
UavMission simulate_uav_mission(const UavSpec& spec, const WindField& field,
                                const RoadGraph& graph, const EnergyParams& params,
                                double duration, Rng& rng);

struct MissionOutcome {
  std::vector<UavMission> uavs;
  std::uint64_t seed = 0;

  // Landing node lists per UAV.
  std::vector<std::vector<NodeId>> landing_nodes() const;
};

// Closed tours from the depot. Each tour removes a random share of the
// non-depot nodes while keeping the rest connected, orders the survivors by
// nearest neighbour plus 2-opt on shortest-path distances, and expands the
// order into a walk on the road graph.
GroundSet generate_candidate_routes(const RoadGraph& graph, std::size_t count,
                                    double removal_fraction, Rng& rng);

// Tour helpers over a symmetric distance matrix. Tours start at index 0 and
// return to it implicitly.
std::vector<std::size_t> nearest_neighbor_tour(const std::vector<std::vector<double>>& dist);
// First-improvement 2-opt; never lengthens the tour.
void two_opt(std::vector<std::size_t>& tour, const std::vector<std::vector<double>>& dist);
double tour_length(std::span<const std::size_t> tour,
                   const std::vector<std::vector<double>>& dist);

// Length of a node walk along the road graph.
double walk_length(const RoadGraph& graph, std::span<const NodeId> walk);

// k connected, size-balanced node sets grown by multi-source BFS from spread
// seeds.
NodePartition partition_graph(const RoadGraph& graph, std::size_t k, Rng& rng);

// Number of UAVs with at least one landing node on a selected route.
std::size_t evaluate_selection(std::span<const RouteId> selection,
                               const MissionOutcome& outcome, const GroundSet& ground);

// Everything needed to roll out one episode.
struct Scenario {
  RoadGraph graph;
  WindField wind;
  std::vector<UavSpec> fleet;
  EnergyParams energy;
  double duration = 300.0;
  GroundSet routes;

  void validate() const;
};

MissionOutcome simulate(const Scenario& scenario, std::uint64_t seed);

nlohmann::json to_json(const RoadGraph& graph);
RoadGraph road_graph_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Scenario& scenario);
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json to_json(const MissionOutcome& outcome);

}  // namespace dol

#endif  // DOL_SIMULATOR_HPP_
