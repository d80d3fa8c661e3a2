#include "hgam/reward.hpp"

#include "hgam/metrics.hpp"

#include <algorithm>

namespace hgam {

bool detect_dilemma(const DilemmaWindow& window, double sense_radius) {
  const auto& p = window.positions();
  if (p.size() < 3) return false;
  const double successor = circle_overlap_area(p[0], p[1], sense_radius);
  for (std::size_t k = 2; k < p.size(); ++k) {
    if (circle_overlap_area(p[0], p[k], sense_radius) > successor) return true;
  }
  return false;
}

double fairness_factor(const WorldState& state) {
  const auto& c = state.config;
  std::vector<double> charged;
  std::vector<double> remaining;
  for (int m = 0; m < c.num_muavs; ++m) {
    const auto& u = state.uavs[m];
    charged.push_back(std::min(u.energy_charged / c.e_max, 1.0));
    remaining.push_back(std::max(u.energy_remaining, 0.0));
  }
  return c.w_f * jain_index(charged) + (1.0 - c.w_f) * jain_index(remaining);
}

namespace {

double safety_penalty(const StepEvents& events, int u, const WorldConfig& config) {
  double pb = 0.0;
  if (events.collided[u]) pb += config.collision_penalty;
  if (events.min_laser[u] < config.laser_warn_dist) pb += config.laser_penalty;
  return pb;
}

}  // namespace

RewardBreakdown muav_reward(const StepEvents& events, bool dilemma, int m,
                            const WorldConfig& config) {
  RewardBreakdown r;
  const double collected = events.collected[m];
  r.h = config.w_c * collected;
  r.iota = config.w_l * events.distance_moved[m] +
           config.discovery_bonus * static_cast<double>(events.discovered[m].size());
  r.pl = (dilemma && collected == 0.0) ? config.rotation_penalty : 0.0;
  r.pb = safety_penalty(events, m, config);
  r.total = r.h + r.iota - r.pl - r.pb;
  return r;
}

double cuav_neglect_penalty(const WorldState& state, int c, const WorldConfig& config) {
  const int num_muavs = config.num_muavs;
  int neediest = 0;
  for (int m = 1; m < num_muavs; ++m) {
    if (state.uavs[m].energy_remaining < state.uavs[neediest].energy_remaining) neediest = m;
  }
  const auto& target = state.uavs[neediest];
  const double distance = (state.uavs[num_muavs + c].pos - target.pos).norm();
  return config.w_d * distance + config.w_e * target.energy_remaining;
}

double cuav_hierarchical_penalty(const WorldState& state, int /*c*/, const ChargeOutcome& outcome,
                                 const WorldConfig& config) {
  if (!outcome.has_target()) return config.plow;
  if (outcome.delivered == 0.0) return 1.2 * config.plow;
  double mean = 0.0;
  for (int m = 0; m < config.num_muavs; ++m) mean += state.uavs[m].energy_remaining;
  mean /= config.num_muavs;
  if (state.uavs[outcome.target].energy_remaining > mean) return config.plow / 3.0;
  return config.plow / 4.0;
}

RewardBreakdown cuav_reward(const WorldState& state, const StepEvents& events, int c,
                            const WorldConfig& config) {
  RewardBreakdown r;
  const auto& outcome = events.charges[c];
  const bool effective = outcome.delivered > 0.0;
  r.h = effective ? config.w_e * fairness_factor(state) : 0.0;
  r.iota = effective ? 0.0 : cuav_neglect_penalty(state, c, config);
  r.pl = cuav_hierarchical_penalty(state, c, outcome, config);
  r.pb = safety_penalty(events, config.num_muavs + c, config);
  r.total = r.h - r.iota - r.pl - r.pb;
  return r;
}

RewardTracker::RewardTracker(const WorldState& initial) {
  for (int m = 0; m < initial.config.num_muavs; ++m) {
    windows_.emplace_back(initial.config.dilemma_window);
    windows_.back().push(initial.uavs[m].pos);
  }
}

std::vector<RewardBreakdown> RewardTracker::on_step(const WorldState& state,
                                                    const StepEvents& events) {
  const auto& config = state.config;
  std::vector<RewardBreakdown> out;
  out.reserve(state.uavs.size());
  for (int m = 0; m < config.num_muavs; ++m) {
    windows_[m].push(state.uavs[m].pos);
    out.push_back(muav_reward(events, detect_dilemma(windows_[m], config.sense_radius), m, config));
  }
  for (int c = 0; c < config.num_cuavs; ++c) out.push_back(cuav_reward(state, events, c, config));
  return out;
}

}  // namespace hgam
