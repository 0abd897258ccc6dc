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

#include "dol/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numbers>
#include <queue>
#include <string>

namespace dol {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double deg2rad(double d) { return d * std::numbers::pi / 180.0; }
double rad2deg(double r) { return r * 180.0 / std::numbers::pi; }

void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

std::size_t idx(NodeId v) { return static_cast<std::size_t>(v); }

}  // namespace

double distance(Point a, Point b) { return std::hypot(b.x - a.x, b.y - a.y); }

// ---------------------------------------------------------------------------
// Road graph

RoadGraph::RoadGraph(std::vector<Point> nodes, std::vector<std::pair<NodeId, NodeId>> edges,
                     NodeId depot)
    : nodes_(std::move(nodes)), adjacency_(nodes_.size()), depot_(depot) {
  for (const auto& [u, v] : edges) {
    require(u >= 0 && v >= 0 && idx(u) < nodes_.size() && idx(v) < nodes_.size(),
            "edge endpoint out of range");
    require(u != v, "self-loop at node " + std::to_string(u));
    if (has_edge(u, v)) continue;
    edges_.push_back({u, v, distance(nodes_[idx(u)], nodes_[idx(v)])});
    adjacency_[idx(u)].push_back(v);
    adjacency_[idx(v)].push_back(u);
  }
  for (auto& adj : adjacency_) std::sort(adj.begin(), adj.end());
}

RoadGraph RoadGraph::grid(std::size_t rows, std::size_t cols, double spacing, NodeId depot) {
  require(rows > 0 && cols > 0 && spacing > 0.0, "invalid grid dimensions");
  std::vector<Point> nodes;
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      nodes.push_back({static_cast<double>(c) * spacing, static_cast<double>(r) * spacing});
      const auto id = static_cast<NodeId>(r * cols + c);
      if (c > 0) edges.emplace_back(id - 1, id);
      if (r > 0) edges.emplace_back(id - static_cast<NodeId>(cols), id);
    }
  }
  RoadGraph g(std::move(nodes), std::move(edges), depot);
  g.validate();
  return g;
}

bool RoadGraph::has_edge(NodeId u, NodeId v) const {
  const auto& adj = adjacency_.at(idx(u));
  return std::binary_search(adj.begin(), adj.end(), v) ||
         std::find(adj.begin(), adj.end(), v) != adj.end();
}

bool RoadGraph::connected(const std::vector<bool>& alive) const {
  std::size_t total = 0;
  NodeId start = -1;
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    if (alive[v]) {
      ++total;
      if (start < 0) start = static_cast<NodeId>(v);
    }
  }
  if (total == 0) return true;
  std::vector<bool> seen(nodes_.size(), false);
  std::vector<NodeId> stack{start};
  seen[idx(start)] = true;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const NodeId v = stack.back();
    stack.pop_back();
    ++reached;
    for (NodeId w : adjacency_[idx(v)]) {
      if (alive[idx(w)] && !seen[idx(w)]) {
        seen[idx(w)] = true;
        stack.push_back(w);
      }
    }
  }
  return reached == total;
}

NodeId RoadGraph::nearest_node(Point p) const {
  require(!nodes_.empty(), "nearest_node on an empty graph");
  NodeId best = 0;
  double best_d = kInf;
  for (std::size_t v = 0; v < nodes_.size(); ++v) {
    const double d = distance(p, nodes_[v]);
    if (d < best_d) {
      best_d = d;
      best = static_cast<NodeId>(v);
    }
  }
  return best;
}

void RoadGraph::shortest_paths(NodeId source, const std::vector<bool>& alive,
                               std::vector<double>& dist, std::vector<NodeId>& pred) const {
  dist.assign(nodes_.size(), kInf);
  pred.assign(nodes_.size(), -1);
  using Item = std::pair<double, NodeId>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
  dist[idx(source)] = 0.0;
  heap.push({0.0, source});
  while (!heap.empty()) {
    const auto [d, v] = heap.top();
    heap.pop();
    if (d > dist[idx(v)]) continue;
    for (NodeId w : adjacency_[idx(v)]) {
      if (!alive[idx(w)]) continue;
      const double nd = d + distance(nodes_[idx(v)], nodes_[idx(w)]);
      if (nd < dist[idx(w)]) {
        dist[idx(w)] = nd;
        pred[idx(w)] = v;
        heap.push({nd, w});
      }
    }
  }
}

void RoadGraph::validate() const {
  require(!nodes_.empty(), "road graph has no nodes");
  require(depot_ >= 0 && idx(depot_) < nodes_.size(), "depot is not a graph node");
  for (const Point& p : nodes_) {
    require(std::isfinite(p.x) && std::isfinite(p.y), "node coordinates must be finite");
  }
  for (const Edge& e : edges_) {
    require(e.length > 0.0, "edge (" + std::to_string(e.u) + ", " + std::to_string(e.v) +
                                ") has zero length");
    require(std::abs(e.length - distance(nodes_[idx(e.u)], nodes_[idx(e.v)])) <= 1e-9,
            "edge length differs from endpoint distance");
  }
  require(connected(), "road graph is not connected");
}

// ---------------------------------------------------------------------------
// Wind and energy

void WindField::validate() const {
  require(a > 0.0 && std::isfinite(a), "wind parameter a must be positive");
  require(b > 0.0 && std::isfinite(b), "wind parameter b must be positive");
  require(std::isfinite(omega_o), "wind direction must be finite");
}

double weibull_pdf(double x, const WindField& f) {
  if (x < 0.0) return 0.0;
  const double t = x / f.a;
  return (f.b / f.a) * std::pow(t, f.b - 1.0) * std::exp(-std::pow(t, f.b));
}

double weibull_cdf(double x, const WindField& f) {
  if (x <= 0.0) return 0.0;
  return -std::expm1(-std::pow(x / f.a, f.b));
}

double weibull_sample(const WindField& f, Rng& rng) {
  // 1 - U lies in (0, 1], so the log is finite.
  const double u = 1.0 - uniform01(rng);
  return f.a * std::pow(-std::log(u), 1.0 / f.b);
}

void EnergyParams::validate() const {
  require(mass > 0.0 && g > 0.0 && rho > 0.0 && area > 0.0 && drag_coeff > 0.0,
          "energy parameters must be positive");
}

double edge_direction(Point u, Point v) {
  const double x = v.x - u.x;
  const double y = v.y - u.y;
  if (x == 0.0 && y == 0.0) throw InvalidArgument("edge direction of coincident points");
  if (x > 0.0) {
    const double d = std::fmod(rad2deg(std::atan(y / x)), 360.0);
    return d < 0.0 ? d + 360.0 : d;
  }
  if (x < 0.0) return 180.0 + rad2deg(std::atan(y / x));
  return y > 0.0 ? 90.0 : 270.0;
}

double relative_wind_direction(double omega_o, double psi) {
  double d = std::fmod(omega_o - psi, 360.0);
  if (d < 0.0) d += 360.0;
  if (d >= 360.0) d -= 360.0;
  return d;
}

double airspeed(double s_d, double omega_s, double theta_deg) {
  const double th = deg2rad(theta_deg);
  const double s_n = s_d - omega_s * std::cos(th);
  const double s_e = -omega_s * std::sin(th);
  return std::hypot(s_n, s_e);
}

InducedVelocity induced_velocity(double thrust, double s_d, double alpha_pitch, double rho,
                                 double area) {
  require(thrust > 0.0, "thrust must be positive");
  require(s_d >= 0.0, "speed must be non-negative");
  const double s_h = std::sqrt(thrust / (2.0 * rho * area));
  if (s_d == 0.0) return {s_h, 0.0, 0};
  const double hh = s_h * s_h;
  const double c = s_d * std::cos(alpha_pitch);
  const double d = s_d * std::sin(alpha_pitch);
  const auto map = [&](double s) { return hh / std::hypot(c, d + s); };

  InducedVelocity out{s_h, 0.0, 0};
  bool settled = false;
  for (std::size_t it = 1; it <= 1000; ++it) {
    const double next = map(out.value);
    out.iterations = it;
    const double step = std::abs(next - out.value);
    out.value = next;
    if (step < 1e-10) {
      settled = true;
      break;
    }
  }
  if (!settled) {
    // s - map(s) is increasing; bracket the root between 0 and s_h.
    double lo = 0.0;
    double hi = std::max(s_h, map(0.0));
    for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mid - map(mid) < 0.0 ? lo : hi) = mid;
      if (mid == lo && mid == hi) break;
    }
    out.value = 0.5 * (lo + hi);
  }
  out.residual = std::abs(out.value - map(out.value));
  if (!(out.residual < 1e-8)) {
    throw RuntimeError("induced velocity did not converge (residual " +
                       std::to_string(out.residual) + ")");
  }
  return out;
}

EnergyBreakdown energy_per_distance(double s_d, double omega_s, double theta_deg,
                                    const EnergyParams& p) {
  require(s_d > 0.0, "drone speed must be positive");
  require(omega_s >= 0.0, "wind speed must be non-negative");
  EnergyBreakdown e;
  e.airspeed = airspeed(s_d, omega_s, theta_deg);
  e.drag = 0.5 * p.rho * e.airspeed * e.airspeed * p.drag_coeff * p.area;
  const double weight = p.mass * p.g;
  e.thrust = weight + e.drag;
  e.alpha_pitch = std::atan(e.drag / weight);
  const InducedVelocity iv = induced_velocity(e.thrust, s_d, e.alpha_pitch, p.rho, p.area);
  e.induced = iv.value;
  e.induced_residual = iv.residual;
  e.power = e.thrust * (s_d * std::sin(e.alpha_pitch) + e.induced);
  e.mu = e.power / s_d;
  return e;
}

double edge_energy(Point from, Point to, double omega_s, double omega_o, double s_d,
                   const EnergyParams& params) {
  const double length = distance(from, to);
  if (length == 0.0) return 0.0;
  const double theta = relative_wind_direction(omega_o, edge_direction(from, to));
  return energy_per_distance(s_d, omega_s, theta, params).mu * length;
}

// ---------------------------------------------------------------------------
// UAV missions

void UavSpec::validate() const {
  require(radius > 0.0, "UAV circle radius must be positive");
  require(waypoint_count >= 2, "UAV needs at least two waypoints");
  require(speed > 0.0, "UAV speed must be positive");
  require(battery_capacity > 0.0, "battery capacity must be positive");
  require(recharge_threshold > 0.0 && recharge_threshold < 1.0,
          "recharge threshold must lie in (0, 1)");
  require(std::isfinite(center.x) && std::isfinite(center.y), "UAV center must be finite");
}

std::vector<Point> UavSpec::waypoints() const {
  std::vector<Point> out;
  out.reserve(waypoint_count);
  for (std::size_t k = 0; k < waypoint_count; ++k) {
    const double t = 2.0 * std::numbers::pi * static_cast<double>(k) /
                     static_cast<double>(waypoint_count);
    out.push_back({center.x + radius * std::cos(t), center.y + radius * std::sin(t)});
  }
  return out;
}

UavMission simulate_uav_mission(const UavSpec& spec, const WindField& field,
                                const RoadGraph& graph, const EnergyParams& params,
                                double duration, Rng& rng) {
  spec.validate();
  field.validate();
  params.validate();
  require(duration >= 0.0, "mission duration must be non-negative");

  const std::vector<Point> wps = spec.waypoints();
  const double reserve = spec.recharge_threshold * spec.battery_capacity;
  UavMission mission;
  Point pos = wps[0];
  std::size_t target = 1 % wps.size();
  double battery = spec.battery_capacity;
  double t = 0.0;
  bool just_recharged = false;

  while (t < duration) {
    const Point next = wps[target];
    const double omega_s = weibull_sample(field, rng);
    mission.wind_speeds.push_back(omega_s);
    const double e = edge_energy(pos, next, omega_s, field.omega_o, spec.speed, params);
    // Right after a recharge the leg is flown regardless; landing again at the
    // same node would not help.
    if (!just_recharged && battery - e < reserve) {
      const NodeId node = graph.nearest_node(pos);
      const Point land = graph.position(node);
      const double divert_wind = weibull_sample(field, rng);
      mission.wind_speeds.push_back(divert_wind);
      const double de = edge_energy(pos, land, divert_wind, field.omega_o, spec.speed, params);
      t += distance(pos, land) / spec.speed;
      mission.landings.push_back({node, t, de > battery});
      battery = spec.battery_capacity;
      pos = land;
      just_recharged = true;
      continue;
    }
    battery -= e;
    t += distance(pos, next) / spec.speed;
    pos = next;
    target = (target + 1) % wps.size();
    just_recharged = false;
  }
  return mission;
}

std::vector<std::vector<NodeId>> MissionOutcome::landing_nodes() const {
  std::vector<std::vector<NodeId>> out;
  for (const auto& u : uavs) {
    std::vector<NodeId> nodes;
    for (const auto& l : u.landings) nodes.push_back(l.node);
    out.push_back(std::move(nodes));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Candidate routes

std::vector<std::size_t> nearest_neighbor_tour(const std::vector<std::vector<double>>& dist) {
  const std::size_t n = dist.size();
  std::vector<std::size_t> tour;
  if (n == 0) return tour;
  std::vector<bool> used(n, false);
  tour.push_back(0);
  used[0] = true;
  for (std::size_t step = 1; step < n; ++step) {
    const std::size_t cur = tour.back();
    std::size_t best = n;
    for (std::size_t j = 0; j < n; ++j) {
      if (!used[j] && (best == n || dist[cur][j] < dist[cur][best])) best = j;
    }
    used[best] = true;
    tour.push_back(best);
  }
  return tour;
}

double tour_length(std::span<const std::size_t> tour,
                   const std::vector<std::vector<double>>& dist) {
  double len = 0.0;
  for (std::size_t i = 0; i < tour.size(); ++i) {
    len += dist[tour[i]][tour[(i + 1) % tour.size()]];
  }
  return len;
}

void two_opt(std::vector<std::size_t>& tour, const std::vector<std::vector<double>>& dist) {
  const std::size_t n = tour.size();
  if (n < 4) return;
  bool improved = true;
  while (improved) {
    improved = false;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const std::size_t a = tour[i - 1], b = tour[i];
        const std::size_t c = tour[j], d = tour[(j + 1) % n];
        const double delta = dist[a][c] + dist[b][d] - dist[a][b] - dist[c][d];
        if (delta < -1e-9) {
          std::reverse(tour.begin() + static_cast<std::ptrdiff_t>(i),
                       tour.begin() + static_cast<std::ptrdiff_t>(j) + 1);
          improved = true;
        }
      }
    }
  }
}

double walk_length(const RoadGraph& graph, std::span<const NodeId> walk) {
  double len = 0.0;
  for (std::size_t i = 1; i < walk.size(); ++i) {
    len += distance(graph.position(walk[i - 1]), graph.position(walk[i]));
  }
  return len;
}

GroundSet generate_candidate_routes(const RoadGraph& graph, std::size_t count,
                                    double removal_fraction, Rng& rng) {
  graph.validate();
  require(count > 0, "route count must be positive");
  require(removal_fraction >= 0.0 && removal_fraction < 1.0,
          "removal fraction must lie in [0, 1)");
  const std::size_t n = graph.size();
  std::vector<NodeId> others;
  for (std::size_t v = 0; v < n; ++v) {
    if (static_cast<NodeId>(v) != graph.depot()) others.push_back(static_cast<NodeId>(v));
  }
  const auto target =
      static_cast<std::size_t>(std::lround(removal_fraction * static_cast<double>(others.size())));

  GroundSet ground;
  for (std::size_t r = 0; r < count; ++r) {
    std::vector<bool> alive;
    bool ok = false;
    for (int attempt = 0; attempt < 100 && !ok; ++attempt) {
      alive.assign(n, true);
      std::vector<NodeId> order = others;
      shuffle(order, rng);
      // Repeated passes: removing outer nodes can make inner ones removable.
      std::size_t removed = 0;
      bool progress = true;
      while (removed < target && progress) {
        progress = false;
        for (NodeId v : order) {
          if (removed == target) break;
          if (!alive[idx(v)]) continue;
          alive[idx(v)] = false;
          if (graph.connected(alive)) {
            ++removed;
            progress = true;
          } else {
            alive[idx(v)] = true;
          }
        }
      }
      ok = removed == target;
    }
    if (!ok) throw RuntimeError("could not remove nodes without disconnecting the graph");

    std::vector<NodeId> keep{graph.depot()};
    for (NodeId v : others) {
      if (alive[idx(v)]) keep.push_back(v);
    }
    std::vector<std::vector<double>> dist(keep.size());
    std::vector<std::vector<NodeId>> preds(keep.size());
    for (std::size_t i = 0; i < keep.size(); ++i) {
      std::vector<double> d;
      graph.shortest_paths(keep[i], alive, d, preds[i]);
      dist[i].resize(keep.size());
      for (std::size_t j = 0; j < keep.size(); ++j) dist[i][j] = d[idx(keep[j])];
    }
    std::vector<std::size_t> tour = nearest_neighbor_tour(dist);
    two_opt(tour, dist);

    Route route;
    route.nodes.push_back(graph.depot());
    for (std::size_t i = 0; i < tour.size(); ++i) {
      const std::size_t from = tour[i];
      const std::size_t to = tour[(i + 1) % tour.size()];
      std::vector<NodeId> path;
      for (NodeId v = keep[to]; v != keep[from]; v = preds[from][idx(v)]) path.push_back(v);
      route.nodes.insert(route.nodes.end(), path.rbegin(), path.rend());
    }
    ground.routes.push_back(std::move(route));
  }
  return ground;
}

// ---------------------------------------------------------------------------
// Partitioning and scoring

NodePartition partition_graph(const RoadGraph& graph, std::size_t k, Rng& rng) {
  const std::size_t n = graph.size();
  require(k >= 1 && k <= n, "partition count must lie in [1, |V|]");
  graph.validate();

  const auto hops_from = [&](const std::vector<NodeId>& sources) {
    std::vector<std::size_t> hops(n, n + 1);
    std::deque<NodeId> q;
    for (NodeId s : sources) {
      hops[idx(s)] = 0;
      q.push_back(s);
    }
    while (!q.empty()) {
      const NodeId v = q.front();
      q.pop_front();
      for (NodeId w : graph.neighbors(v)) {
        if (hops[idx(w)] > hops[idx(v)] + 1) {
          hops[idx(w)] = hops[idx(v)] + 1;
          q.push_back(w);
        }
      }
    }
    return hops;
  };

  // Spread seeds: a random first one, then farthest-first by hop count.
  std::vector<NodeId> seeds{static_cast<NodeId>(uniform_index(rng, n))};
  while (seeds.size() < k) {
    const auto hops = hops_from(seeds);
    std::size_t best = 0;
    for (std::size_t v = 1; v < n; ++v) {
      if (hops[v] > hops[best]) best = v;
    }
    seeds.push_back(static_cast<NodeId>(best));
  }

  // Balanced growth: the smallest set that can still grow takes the next node
  // from its frontier.
  std::vector<int> owner(n, -1);
  std::vector<std::deque<NodeId>> frontier(k);
  NodePartition part;
  part.sets.resize(k);
  const auto claim = [&](std::size_t s, NodeId v) {
    owner[idx(v)] = static_cast<int>(s);
    part.sets[s].push_back(v);
    for (NodeId w : graph.neighbors(v)) {
      if (owner[idx(w)] < 0) frontier[s].push_back(w);
    }
  };
  for (std::size_t s = 0; s < k; ++s) claim(s, seeds[s]);
  std::size_t assigned = k;
  while (assigned < n) {
    std::size_t pick = k;
    for (std::size_t s = 0; s < k; ++s) {
      while (!frontier[s].empty() && owner[idx(frontier[s].front())] >= 0) {
        frontier[s].pop_front();
      }
      if (frontier[s].empty()) continue;
      if (pick == k || part.sets[s].size() < part.sets[pick].size()) pick = s;
    }
    if (pick == k) throw RuntimeError("graph partition stalled on a disconnected graph");
    const NodeId v = frontier[pick].front();
    frontier[pick].pop_front();
    claim(pick, v);
    ++assigned;
  }

  // Rebalance: move a boundary node from a set to a neighbouring set that is
  // at least two smaller, as long as the donor stays connected. Each move
  // lowers the sum of squared sizes, so the loop terminates.
  const auto donor_stays_connected = [&](std::size_t s, NodeId v) {
    std::vector<bool> alive(n, false);
    for (NodeId w : part.sets[s]) alive[idx(w)] = true;
    alive[idx(v)] = false;
    return graph.connected(alive);
  };
  while (true) {
    std::size_t best_gap = 1;
    NodeId move = -1;
    std::size_t move_to = 0;
    for (std::size_t v = 0; v < n; ++v) {
      const auto from = static_cast<std::size_t>(owner[v]);
      for (NodeId w : graph.neighbors(static_cast<NodeId>(v))) {
        const auto to = static_cast<std::size_t>(owner[idx(w)]);
        if (to == from || part.sets[from].size() < part.sets[to].size() + 2) continue;
        const std::size_t gap = part.sets[from].size() - part.sets[to].size();
        if (gap > best_gap && donor_stays_connected(from, static_cast<NodeId>(v))) {
          best_gap = gap;
          move = static_cast<NodeId>(v);
          move_to = to;
        }
      }
    }
    if (move < 0) break;
    auto& donor = part.sets[static_cast<std::size_t>(owner[idx(move)])];
    donor.erase(std::find(donor.begin(), donor.end(), move));
    part.sets[move_to].push_back(move);
    owner[idx(move)] = static_cast<int>(move_to);
  }
  for (auto& set : part.sets) std::sort(set.begin(), set.end());
  return part;
}

std::size_t evaluate_selection(std::span<const RouteId> selection,
                               const MissionOutcome& outcome, const GroundSet& ground) {
  check_selection(selection, ground.size());
  std::vector<NodeId> covered;
  for (RouteId r : selection) {
    const auto& nodes = ground.routes[r].nodes;
    covered.insert(covered.end(), nodes.begin(), nodes.end());
  }
  std::sort(covered.begin(), covered.end());
  covered.erase(std::unique(covered.begin(), covered.end()), covered.end());
  std::size_t count = 0;
  for (const auto& uav : outcome.uavs) {
    for (const auto& l : uav.landings) {
      if (std::binary_search(covered.begin(), covered.end(), l.node)) {
        ++count;
        break;
      }
    }
  }
  return count;
}

// ---------------------------------------------------------------------------
// Scenarios

void Scenario::validate() const {
  graph.validate();
  wind.validate();
  energy.validate();
  require(duration > 0.0, "mission duration must be positive");
  for (const auto& u : fleet) u.validate();
  for (const auto& route : routes.routes) {
    for (NodeId v : route.nodes) {
      require(v >= 0 && idx(v) < graph.size(),
              "route visits node " + std::to_string(v) + " outside the road graph");
    }
  }
}

MissionOutcome simulate(const Scenario& scenario, std::uint64_t seed) {
  MissionOutcome out;
  out.seed = seed;
  for (std::size_t u = 0; u < scenario.fleet.size(); ++u) {
    Rng rng = make_stream(seed, u);
    out.uavs.push_back(simulate_uav_mission(scenario.fleet[u], scenario.wind, scenario.graph,
                                            scenario.energy, scenario.duration, rng));
  }
  return out;
}

nlohmann::json to_json(const RoadGraph& graph) {
  nlohmann::json nodes = nlohmann::json::array();
  for (const Point& p : graph.nodes()) nodes.push_back({p.x, p.y});
  nlohmann::json edges = nlohmann::json::array();
  for (const Edge& e : graph.edges()) edges.push_back({e.u, e.v});
  return {{"nodes", nodes}, {"edges", edges}, {"depot", graph.depot()}};
}

RoadGraph road_graph_from_json(const nlohmann::json& j) {
  std::vector<Point> nodes;
  for (const auto& p : j.at("nodes")) nodes.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<NodeId>(), e.at(1).get<NodeId>());
  RoadGraph g(std::move(nodes), std::move(edges), j.at("depot").get<NodeId>());
  g.validate();
  return g;
}

nlohmann::json to_json(const Scenario& s) {
  nlohmann::json fleet = nlohmann::json::array();
  for (const auto& u : s.fleet) {
    fleet.push_back({{"center", {u.center.x, u.center.y}},
                     {"radius", u.radius},
                     {"waypoint_count", u.waypoint_count},
                     {"speed", u.speed},
                     {"battery_capacity", u.battery_capacity},
                     {"recharge_threshold", u.recharge_threshold}});
  }
  nlohmann::json routes = nlohmann::json::array();
  for (const auto& r : s.routes.routes) routes.push_back(r.nodes);
  return {{"graph", to_json(s.graph)},
          {"wind", {{"a", s.wind.a}, {"b", s.wind.b}, {"omega_o", s.wind.omega_o}}},
          {"fleet", fleet},
          {"energy",
           {{"mass", s.energy.mass},
            {"g", s.energy.g},
            {"rho", s.energy.rho},
            {"area", s.energy.area},
            {"drag_coeff", s.energy.drag_coeff}}},
          {"duration", s.duration},
          {"routes", routes}};
}

Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  s.graph = road_graph_from_json(j.at("graph"));
  const auto& w = j.at("wind");
  s.wind = {w.at("a").get<double>(), w.at("b").get<double>(), w.at("omega_o").get<double>()};
  for (const auto& u : j.at("fleet")) {
    UavSpec spec;
    spec.center = {u.at("center").at(0).get<double>(), u.at("center").at(1).get<double>()};
    spec.radius = u.at("radius").get<double>();
    spec.waypoint_count = u.at("waypoint_count").get<std::size_t>();
    spec.speed = u.at("speed").get<double>();
    spec.battery_capacity = u.at("battery_capacity").get<double>();
    spec.recharge_threshold = u.at("recharge_threshold").get<double>();
    s.fleet.push_back(spec);
  }
  const auto& e = j.at("energy");
  s.energy = {e.at("mass").get<double>(), e.at("g").get<double>(), e.at("rho").get<double>(),
              e.at("area").get<double>(), e.at("drag_coeff").get<double>()};
  s.duration = j.at("duration").get<double>();
  for (const auto& r : j.at("routes")) s.routes.routes.push_back({r.get<std::vector<NodeId>>()});
  s.validate();
  return s;
}

nlohmann::json to_json(const MissionOutcome& o) {
  nlohmann::json uavs = nlohmann::json::array();
  for (const auto& u : o.uavs) {
    nlohmann::json landings = nlohmann::json::array();
    for (const auto& l : u.landings) {
      landings.push_back({{"node", l.node}, {"time", l.time}, {"forced", l.forced}});
    }
    uavs.push_back({{"landings", landings}, {"wind_speeds", u.wind_speeds}});
  }
  return {{"seed", o.seed}, {"uavs", uavs}};
}

}  // namespace dol
