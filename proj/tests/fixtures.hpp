#pragma once

#include "hgam/world.hpp"

#include <utility>
#include <vector>

namespace hgam::testing {

// Hand-placed world: the first config.num_muavs positions are MUAVs.
inline WorldState make_state(const WorldConfig& config, const std::vector<Vec2>& uavs,
                             const std::vector<std::pair<Vec2, double>>& pois = {},
                             const std::vector<Obstacle>& obstacles = {}) {
  WorldState s;
  s.config = config;
  for (std::size_t u = 0; u < uavs.size(); ++u) {
    UavState a;
    a.kind = static_cast<int>(u) < config.num_muavs ? UavKind::Muav : UavKind::Cuav;
    a.pos = uavs[u];
    a.energy_remaining = quantize(config.initial_energy);
    s.uavs.push_back(a);
  }
  for (const auto& [pos, m0] : pois) {
    PoiState p;
    p.pos = pos;
    p.data_initial = m0;
    p.data_remaining = m0;
    s.pois.push_back(p);
  }
  s.obstacles = obstacles;
  return s;
}

inline WorldConfig open_config(int muavs, int cuavs) {
  WorldConfig c;
  c.num_muavs = muavs;
  c.num_cuavs = cuavs;
  c.num_obstacles = 0;
  c.num_pois = 0;
  return c;
}

}  // namespace hgam::testing
