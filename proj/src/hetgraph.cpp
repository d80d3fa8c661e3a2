#include "hgam/hetgraph.hpp"

#include "hgam/errors.hpp"

#include <limits>

namespace hgam {

std::vector<int> HeteroGraph::ego_neighbors() const {
  std::vector<int> out;
  for (const auto& [src, dst] : edges) {
    if (dst == ego) out.push_back(src);
  }
  return out;
}

FleetView fleet_view(const WorldState& state) {
  FleetView f;
  for (const auto& u : state.uavs) {
    f.positions.push_back(u.pos);
    f.kinds.push_back(u.kind);
  }
  return f;
}

int local_feature_width(const WorldConfig& config) {
  return max_observation_size(config) + kNumKinds;
}

int global_feature_width(const WorldConfig& config) {
  return max_observation_size(config) + 2 + kNumKinds;
}

Eigen::VectorXd local_node_feature(const Eigen::VectorXd& observation, UavKind kind,
                                   const WorldConfig& config) {
  const int obs_width = max_observation_size(config);
  if (observation.size() > obs_width) throw ContractViolation("observation wider than layout");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(obs_width + kNumKinds);
  v.head(observation.size()) = observation;
  v(obs_width + static_cast<int>(kind)) = 1.0;
  return v;
}

Eigen::VectorXd global_node_feature(const Eigen::VectorXd& observation, const Action& action,
                                    UavKind kind, const WorldConfig& config) {
  const int obs_width = max_observation_size(config);
  if (observation.size() > obs_width) throw ContractViolation("observation wider than layout");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(obs_width + 2 + kNumKinds);
  v.head(observation.size()) = observation;
  v(obs_width) = action.ax;
  v(obs_width + 1) = action.ay;
  v(obs_width + 2 + static_cast<int>(kind)) = 1.0;
  return v;
}

HeteroGraph build_local_graph(const FleetView& fleet, int u,
                              std::span<const Eigen::VectorXd> observations,
                              const WorldConfig& config) {
  HeteroGraph g;
  g.ego = 0;
  g.nodes.push_back({u, fleet.kinds[u], local_node_feature(observations[u], fleet.kinds[u], config)});
  for (UavKind kind : {UavKind::Muav, UavKind::Cuav}) {
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (int v = 0; v < fleet.size(); ++v) {
      if (v == u || fleet.kinds[v] != kind) continue;
      const double d = (fleet.positions[v] - fleet.positions[u]).norm();
      if (config.comm_radius > 0 && d > config.comm_radius) continue;
      if (d < best_dist) {
        best_dist = d;
        best = v;
      }
    }
    if (best < 0) continue;
    g.nodes.push_back({best, kind, local_node_feature(observations[best], kind, config)});
    g.edges.emplace_back(static_cast<int>(g.nodes.size()) - 1, g.ego);
  }
  return g;
}

HeteroGraph build_local_graph(const WorldState& state, int u,
                              std::span<const Eigen::VectorXd> observations) {
  return build_local_graph(fleet_view(state), u, observations, state.config);
}

std::vector<HeteroGraph> build_global_graph(const FleetView& fleet,
                                            std::span<const Eigen::VectorXd> observations,
                                            std::span<const Action> actions,
                                            const WorldConfig& config) {
  HeteroGraph base;
  for (int v = 0; v < fleet.size(); ++v) {
    base.nodes.push_back(
        {v, fleet.kinds[v], global_node_feature(observations[v], actions[v], fleet.kinds[v], config)});
  }
  std::vector<HeteroGraph> views(fleet.size(), base);
  for (int ego = 0; ego < fleet.size(); ++ego) {
    auto& g = views[ego];
    g.ego = ego;
    for (int src = 0; src < fleet.size(); ++src) {
      for (int dst = 0; dst < fleet.size(); ++dst) {
        if (src != dst) g.edges.emplace_back(src, dst);
      }
    }
  }
  return views;
}

}  // namespace hgam
