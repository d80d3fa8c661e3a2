#pragma once

#include "hgam/env.hpp"
#include "hgam/world.hpp"

#include <Eigen/Core>

#include <span>
#include <utility>
#include <vector>

namespace hgam {

struct GraphNode {
  int agent = 0;
  UavKind kind = UavKind::Muav;
  Eigen::VectorXd feature;
};

/// Typed UAV nodes with a common feature width. Edges point from a neighbour
/// to the node that aggregates it; the ego never aggregates itself.
struct HeteroGraph {
  std::vector<GraphNode> nodes;
  int ego = 0;
  std::vector<std::pair<int, int>> edges;  // (source node, destination node)

  /// Node indices with an edge into the ego, in edge order.
  std::vector<int> ego_neighbors() const;
  int feature_width() const { return nodes.empty() ? 0 : static_cast<int>(nodes.front().feature.size()); }
};

/// Positions and kinds of the fleet; all a graph needs from the world.
struct FleetView {
  std::vector<Vec2> positions;
  std::vector<UavKind> kinds;

  int size() const { return static_cast<int>(kinds.size()); }
};

FleetView fleet_view(const WorldState& state);

// Node feature layouts:
//   local:  [observation, zero-padded to the widest kind] [type one-hot]
//   global: [observation, zero-padded]                   [action x, y] [type one-hot]
int local_feature_width(const WorldConfig& config);
int global_feature_width(const WorldConfig& config);
/// Offset of the action slot inside a global node feature.
inline int action_offset(const WorldConfig& config) { return max_observation_size(config); }

Eigen::VectorXd local_node_feature(const Eigen::VectorXd& observation, UavKind kind,
                                   const WorldConfig& config);
Eigen::VectorXd global_node_feature(const Eigen::VectorXd& observation, const Action& action,
                                    UavKind kind, const WorldConfig& config);

/// Actor graph: the ego plus the nearest other UAV of each kind (ties to the
/// lower index), optionally limited to config.comm_radius.
HeteroGraph build_local_graph(const FleetView& fleet, int u,
                              std::span<const Eigen::VectorXd> observations,
                              const WorldConfig& config);
HeteroGraph build_local_graph(const WorldState& state, int u,
                              std::span<const Eigen::VectorXd> observations);

/// Critic graphs: complete directed graph over the fleet with
/// observation+action features, one view per ego.
std::vector<HeteroGraph> build_global_graph(const FleetView& fleet,
                                            std::span<const Eigen::VectorXd> observations,
                                            std::span<const Action> actions,
                                            const WorldConfig& config);

}  // namespace hgam
