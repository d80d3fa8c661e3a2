#pragma once

#include "hgam/world.hpp"

#include <Eigen/Core>

#include <span>
#include <utility>
#include <vector>

namespace hgam {

/// Direction command in [-1, 1]^2. The magnitude is irrelevant: every UAV
/// moves exactly step_length per step unless the command is zero.
struct Action {
  double ax = 0.0;
  double ay = 0.0;

  Action clamped() const;
  bool operator==(const Action&) const = default;
};

Vec2 apply_action(const Vec2& pos, const Action& a, double step_length);

/// Distance along num_lasers evenly spaced beams (beam k at 2*pi*k/n) to
/// the nearest obstacle surface or arena wall, capped at the view range.
std::vector<double> cast_lasers(const WorldState& state, int u);

struct ChargeOutcome {
  int target = -1;  // MUAV index, -1 when nobody is in range
  double delivered = 0.0;
  double wasted = 0.0;

  bool has_target() const { return target >= 0; }
};

struct StepEvents {
  std::vector<double> collected;                               // per MUAV, c_t^m
  std::vector<std::vector<std::pair<int, double>>> collected_from;  // per MUAV: (poi, amount)
  std::vector<double> distance_moved;                          // per UAV, l_t^u
  std::vector<ChargeOutcome> charges;                          // per CUAV
  std::vector<bool> collided;                                  // per UAV
  std::vector<double> min_laser;                               // per UAV
  std::vector<std::vector<int>> discovered;                    // per MUAV
  bool terminated = false;
  Termination cause = Termination::None;
};

/// Advances the world one step: move, collide, collect, charge, spend energy,
/// tick the clock. Throws ContractViolation on a finished episode or an
/// action count that does not match the fleet.
StepEvents step(WorldState& state, std::span<const Action> actions);

/// Offsets into the flat observation vector.
struct ObservationLayout {
  int lasers = 0;
  int uav_blocks = 0;   // 2 x (dir x, dir y, distance, type flag)
  int poi_blocks = -1;  // MUAV only: 5 x (dir x, dir y, remaining data)
  int energy_table = -1;  // CUAV only: num_muavs x (Er/Er0, Ec/Emax, dir x, dir y, distance)
  int velocity = 0;
  int position = 0;
  int time = 0;
  int own_energy = -1;  // MUAV only: Er/Er0, Ec/Emax, Ed/Er0
  int type_onehot = 0;
  int size = 0;
};

inline constexpr int kObservedUavs = 2;
inline constexpr int kUavBlockWidth = 4;
inline constexpr int kObservedPois = 5;
inline constexpr int kPoiBlockWidth = 3;
inline constexpr int kEnergyRowWidth = 5;

ObservationLayout observation_layout(UavKind kind, const WorldConfig& config);
inline int observation_size(UavKind kind, const WorldConfig& config) {
  return observation_layout(kind, config).size;
}
int max_observation_size(const WorldConfig& config);

Eigen::VectorXd observe(const WorldState& state, int u);

}  // namespace hgam
