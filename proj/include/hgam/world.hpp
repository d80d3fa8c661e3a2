#pragma once

#include <Eigen/Core>

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace hgam {

using Vec2 = Eigen::Vector2d;
using Rng = std::mt19937_64;

enum class UavKind : std::uint8_t { Muav = 0, Cuav = 1 };

inline constexpr int kNumKinds = 2;

inline const char* kind_name(UavKind k) { return k == UavKind::Muav ? "muav" : "cuav"; }

struct WorldConfig {
  double area_width = 16.0;
  double area_height = 16.0;
  int num_muavs = 2;
  int num_cuavs = 1;
  int num_pois = 100;
  int num_obstacles = 6;
  double obstacle_radius_min = 0.4;
  double obstacle_radius_max = 0.8;
  double sense_radius = 1.0;
  double charge_radius = 1.5;
  double view_range = 4.0;
  double uav_radius = 0.2;
  double poi_radius = 0.1;
  double step_length = 0.13;
  double collect_rate = 0.2;
  int max_steps = 700;
  double initial_energy = 50.0;  // Er0
  double charge_per_step = 0.5;  // e0
  double e_max = 50.0;           // E_max
  double beta = 1.0;
  double kappa = 1.0;
  int num_lasers = 16;
  double laser_warn_dist = 0.5;
  double low_battery_frac = 0.2;

  double w_c = 0.5;
  double w_l = 0.02;
  double w_e = 1.6;
  double w_f = 0.5;
  double w_d = 0.1;
  double discovery_bonus = 0.1;
  double rotation_penalty = 0.5;
  double plow = 2.0;
  double collision_penalty = 100.0;
  double laser_penalty = 2.0;
  int dilemma_window = 10;

  // Widen the observation range to the arena diagonal.
  bool global_view = false;
  // Neighbour eligibility radius for local graphs; <= 0 means fleet-wide.
  double comm_radius = 0.0;

  int num_uavs() const { return num_muavs + num_cuavs; }
  double effective_view_range() const {
    return global_view ? std::hypot(area_width, area_height) : view_range;
  }
  bool operator==(const WorldConfig&) const = default;
};

/// Throws ConfigError when an invariant of WorldConfig does not hold.
void validate(const WorldConfig& config);

// Data and energy quantities live on a 2^-30 grid, so every sum of them in
// the simulator is exact in double precision.
inline constexpr double kQuantum = 0x1p-30;
inline double quantize(double x) { return std::nearbyint(x / kQuantum) * kQuantum; }

struct UavState {
  UavKind kind = UavKind::Muav;
  Vec2 pos = Vec2::Zero();
  Vec2 velocity = Vec2::Zero();  // last displacement
  double energy_remaining = 0.0;  // Er
  double energy_charged = 0.0;    // Ec
  double energy_consumed = 0.0;   // Ed
  bool alive = true;

  bool operator==(const UavState& o) const {
    return kind == o.kind && pos == o.pos && velocity == o.velocity &&
           energy_remaining == o.energy_remaining && energy_charged == o.energy_charged &&
           energy_consumed == o.energy_consumed && alive == o.alive;
  }
};

struct PoiState {
  Vec2 pos = Vec2::Zero();
  double data_initial = 0.0;    // m0
  double data_remaining = 0.0;  // m_t
  bool discovered = false;

  bool operator==(const PoiState& o) const {
    return pos == o.pos && data_initial == o.data_initial &&
           data_remaining == o.data_remaining && discovered == o.discovered;
  }
};

struct Obstacle {
  Vec2 center = Vec2::Zero();
  double radius = 0.0;

  bool operator==(const Obstacle& o) const { return center == o.center && radius == o.radius; }
};

enum class Termination : std::uint8_t { None, Collision, Depletion, MaxSteps };

const char* termination_name(Termination t);

struct WorldState {
  WorldConfig config;
  std::vector<UavState> uavs;  // MUAVs first, then CUAVs
  std::vector<PoiState> pois;
  std::vector<Obstacle> obstacles;
  int t = 0;
  bool done = false;
  Termination cause = Termination::None;
  Rng rng;

  int num_muavs() const { return config.num_muavs; }
  bool is_muav(int u) const { return u < config.num_muavs; }
  bool operator==(const WorldState&) const = default;
};

/// Uniform double in [lo, hi) from the top 53 bits of the generator.
inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1p-53);
}

/// Random scenario: UAV starts, then obstacles clear of every start disk,
/// then PoIs uniform over the arena.
WorldState generate_scenario(const WorldConfig& config, std::uint64_t seed);

/// Intersection area of two disks of equal radius r.
double circle_overlap_area(const Vec2& c1, const Vec2& c2, double r);

}  // namespace hgam
