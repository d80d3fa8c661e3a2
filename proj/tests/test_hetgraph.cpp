#include <doctest.h>

#include "fixtures.hpp"
#include "hgam/env.hpp"
#include "hgam/hetgraph.hpp"

#include <set>

using namespace hgam;
using hgam::testing::make_state;
using hgam::testing::open_config;

namespace {

std::vector<Eigen::VectorXd> observe_all(const WorldState& s) {
  std::vector<Eigen::VectorXd> out;
  for (int u = 0; u < static_cast<int>(s.uavs.size()); ++u) out.push_back(observe(s, u));
  return out;
}

std::set<int> node_agents(const HeteroGraph& g) {
  std::set<int> out;
  for (const auto& n : g.nodes) out.insert(n.agent);
  return out;
}

}  // namespace

TEST_SUITE("hetgraph") {
  TEST_CASE("local graph of the default fleet") {
    const WorldState s = generate_scenario(WorldConfig{}, 2);
    const auto obs = observe_all(s);
    const auto g = build_local_graph(s, 0, obs);
    CHECK(node_agents(g) == std::set<int>{0, 1, 2});
    CHECK(g.nodes[g.ego].agent == 0);
    CHECK(g.edges.size() == 2);
    for (auto [src, dst] : g.edges) {
      CHECK(dst == g.ego);
      CHECK(src != g.ego);
    }
    CHECK(g.feature_width() == 51);
  }

  TEST_CASE("lone MUAV has no neighbours") {
    WorldConfig c = open_config(1, 0);
    const auto s = make_state(c, {{3, 3}});
    const auto g = build_local_graph(s, 0, observe_all(s));
    CHECK(g.nodes.size() == 1);
    CHECK(g.edges.empty());
  }

  TEST_CASE("nearest of each kind, ties to the lower index") {
    WorldConfig c = open_config(3, 1);
    const auto s = make_state(c, {{8, 8}, {8, 11}, {8, 13}, {8, 5}});
    const auto g = build_local_graph(s, 3, observe_all(s));
    CHECK(node_agents(g) == std::set<int>{3, 0});

    const auto t = make_state(c, {{5, 5}, {5, 7}, {5, 3}, {10, 10}});
    const auto h = build_local_graph(t, 0, observe_all(t));
    CHECK(node_agents(h) == std::set<int>{0, 1, 3});
  }

  TEST_CASE("communication radius drops far neighbours") {
    WorldConfig c = open_config(2, 1);
    c.comm_radius = 2.0;
    const auto s = make_state(c, {{5, 5}, {5, 6}, {12, 12}});
    const auto g = build_local_graph(s, 0, observe_all(s));
    CHECK(node_agents(g) == std::set<int>{0, 1});
  }

  TEST_CASE("node count stays within 1..3 for any fleet") {
    for (int m = 1; m <= 4; ++m) {
      for (int cu = 0; cu <= 3; ++cu) {
        WorldConfig c;
        c.num_muavs = m;
        c.num_cuavs = cu;
        const auto s = generate_scenario(c, static_cast<std::uint64_t>(10 * m + cu));
        const auto obs = observe_all(s);
        for (int u = 0; u < m + cu; ++u) {
          const auto g = build_local_graph(s, u, obs);
          CHECK(g.nodes.size() >= 1);
          CHECK(g.nodes.size() <= 3);
        }
      }
    }
  }

  TEST_CASE("global graph views") {
    const WorldState s = generate_scenario(WorldConfig{}, 5);
    const auto obs = observe_all(s);
    const std::vector<Action> acts{{0.5, -0.5}, {0, 0}, {1, 1}};
    const auto views = build_global_graph(fleet_view(s), obs, acts, s.config);
    REQUIRE(views.size() == 3);
    CHECK(global_feature_width(s.config) == 53);
    CHECK(action_offset(s.config) == 49);
    for (int e = 0; e < 3; ++e) {
      CHECK(views[e].ego == e);
      CHECK(views[e].ego_neighbors().size() == 2);
      CHECK(views[e].feature_width() == 53);
      CHECK(views[e].edges == views[0].edges);
      for (std::size_t n = 0; n < 3; ++n) {
        CHECK(views[e].nodes[n].feature == views[0].nodes[n].feature);
      }
    }
    const auto& f0 = views[0].nodes[0].feature;
    CHECK(f0(49) == 0.5);
    CHECK(f0(50) == -0.5);
    CHECK(f0(51) == 1.0);
    const auto& f2 = views[0].nodes[2].feature;
    CHECK(f2.segment(41, 8).isZero());
    CHECK(f2(52) == 1.0);
  }

  TEST_CASE("zero joint action leaves the action slots zero") {
    const WorldState s = generate_scenario(WorldConfig{}, 6);
    const auto obs = observe_all(s);
    const std::vector<Action> zero(3);
    const auto views = build_global_graph(fleet_view(s), obs, zero, s.config);
    for (const auto& n : views[1].nodes) {
      CHECK(n.feature.segment(49, 2).isZero());
      CHECK(n.feature.head(obs[n.agent].size()) == obs[n.agent]);
    }
  }

  TEST_CASE("feature offsets do not depend on fleet composition") {
    WorldConfig a = open_config(1, 0);
    WorldConfig b = open_config(3, 2);
    // the widest observation is the MUAV one in both fleets
    CHECK(action_offset(a) == action_offset(b));
    CHECK(local_feature_width(a) == local_feature_width(b));
  }
}
