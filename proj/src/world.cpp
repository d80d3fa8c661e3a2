#include "hgam/world.hpp"

#include "hgam/errors.hpp"

#include <algorithm>
#include <numbers>
#include <string>

namespace hgam {

namespace {

constexpr int kMaxPlacementAttempts = 10000;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid world config: " + what);
}

}  // namespace

void validate(const WorldConfig& c) {
  require(c.area_width > 0 && c.area_height > 0, "area dimensions must be positive");
  require(c.num_muavs >= 1, "num_muavs must be >= 1");
  require(c.num_cuavs >= 0, "num_cuavs must be >= 0");
  require(c.num_pois >= 0 && c.num_obstacles >= 0, "counts must be non-negative");
  require(c.sense_radius > 0 && c.charge_radius > 0 && c.view_range > 0 && c.uav_radius > 0 &&
              c.poi_radius > 0,
          "radii must be positive");
  require(c.step_length > 0, "step_length must be positive");
  require(c.view_range >= c.sense_radius, "view_range must be >= sense_radius");
  require(c.max_steps >= 1, "max_steps must be >= 1");
  require(c.w_f >= 0 && c.w_f <= 1, "w_f must lie in [0, 1]");
  require(c.low_battery_frac >= 0 && c.low_battery_frac <= 1,
          "low_battery_frac must lie in [0, 1]");
  require(c.initial_energy > 0 && c.e_max > 0, "energies must be positive");
  require(c.charge_per_step >= 0 && c.collect_rate >= 0, "rates must be non-negative");
  require(c.beta >= 0 && c.kappa >= 0, "energy coefficients must be non-negative");
  require(c.num_lasers >= 1, "num_lasers must be >= 1");
  require(c.obstacle_radius_min > 0 && c.obstacle_radius_max >= c.obstacle_radius_min,
          "obstacle radius range invalid");
  require(c.dilemma_window >= 3, "dilemma_window must be >= 3");
  require(2 * c.uav_radius < std::min(c.area_width, c.area_height), "arena too small for a UAV");
}

const char* termination_name(Termination t) {
  switch (t) {
    case Termination::None: return "none";
    case Termination::Collision: return "collision";
    case Termination::Depletion: return "depletion";
    case Termination::MaxSteps: return "max_steps";
  }
  return "none";
}

WorldState generate_scenario(const WorldConfig& config, std::uint64_t seed) {
  validate(config);
  WorldState s;
  s.config = config;
  s.rng.seed(seed);
  Rng& rng = s.rng;

  const double energy0 = quantize(config.initial_energy);
  const double r = config.uav_radius;
  s.uavs.reserve(config.num_uavs());
  for (int u = 0; u < config.num_uavs(); ++u) {
    UavState uav;
    uav.kind = u < config.num_muavs ? UavKind::Muav : UavKind::Cuav;
    uav.pos = Vec2(uniform(rng, r, config.area_width - r), uniform(rng, r, config.area_height - r));
    uav.energy_remaining = energy0;
    s.uavs.push_back(uav);
  }

  for (int b = 0; b < config.num_obstacles; ++b) {
    bool placed = false;
    for (int attempt = 0; attempt < kMaxPlacementAttempts && !placed; ++attempt) {
      Obstacle ob;
      ob.radius = uniform(rng, config.obstacle_radius_min, config.obstacle_radius_max);
      if (2 * ob.radius >= config.area_width || 2 * ob.radius >= config.area_height) continue;
      ob.center = Vec2(uniform(rng, ob.radius, config.area_width - ob.radius),
                       uniform(rng, ob.radius, config.area_height - ob.radius));
      placed = true;
      for (const auto& uav : s.uavs) {
        if ((uav.pos - ob.center).norm() <= ob.radius + r) {
          placed = false;
          break;
        }
      }
      if (placed) s.obstacles.push_back(ob);
    }
    if (!placed) {
      throw ScenarioInfeasible("could not place obstacle " + std::to_string(b) + " after " +
                               std::to_string(kMaxPlacementAttempts) + " attempts");
    }
  }

  s.pois.reserve(config.num_pois);
  for (int p = 0; p < config.num_pois; ++p) {
    PoiState poi;
    poi.pos = Vec2(uniform(rng, 0.0, config.area_width), uniform(rng, 0.0, config.area_height));
    poi.data_initial = quantize(uniform(rng, 0.0, 1.0));
    poi.data_remaining = poi.data_initial;
    s.pois.push_back(poi);
  }
  return s;
}

double circle_overlap_area(const Vec2& c1, const Vec2& c2, double r) {
  const double d = (c1 - c2).norm();
  if (d >= 2 * r) return 0.0;
  const double lens = 2 * r * r * std::acos(d / (2 * r)) - 0.5 * d * std::sqrt(4 * r * r - d * d);
  return std::clamp(lens, 0.0, std::numbers::pi * r * r);
}

}  // namespace hgam
