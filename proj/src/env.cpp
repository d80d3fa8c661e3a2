#include "hgam/env.hpp"

#include "hgam/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace hgam {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Distance from p along unit direction d to the circle boundary; inf on miss,
// 0 when p is already inside.
double ray_circle(const Vec2& p, const Vec2& d, const Vec2& center, double radius) {
  const Vec2 f = p - center;
  const double c = f.squaredNorm() - radius * radius;
  if (c <= 0) return 0.0;
  const double b = f.dot(d);
  const double disc = b * b - c;
  if (disc < 0) return kInf;
  const double t = -b - std::sqrt(disc);
  return t > 0 ? t : kInf;
}

double ray_walls(const Vec2& p, const Vec2& d, double width, double height) {
  double t = kInf;
  if (d.x() > 0) t = std::min(t, (width - p.x()) / d.x());
  if (d.x() < 0) t = std::min(t, -p.x() / d.x());
  if (d.y() > 0) t = std::min(t, (height - p.y()) / d.y());
  if (d.y() < 0) t = std::min(t, -p.y() / d.y());
  return std::max(t, 0.0);
}

bool collides(const WorldState& s, const Vec2& p) {
  const auto& c = s.config;
  const double r = c.uav_radius;
  if (p.x() - r < 0 || p.y() - r < 0 || p.x() + r > c.area_width || p.y() + r > c.area_height) {
    return true;
  }
  return std::any_of(s.obstacles.begin(), s.obstacles.end(), [&](const Obstacle& ob) {
    return (p - ob.center).norm() < ob.radius + r;
  });
}

// Indices sorted nearest first, ties broken by lower index.
template <typename Pred, typename PosOf>
std::vector<int> nearest_first(const Vec2& from, int count, Pred&& eligible, PosOf&& pos_of) {
  std::vector<std::pair<double, int>> ranked;
  for (int i = 0; i < count; ++i) {
    if (eligible(i)) ranked.emplace_back((pos_of(i) - from).norm(), i);
  }
  std::sort(ranked.begin(), ranked.end());
  std::vector<int> out;
  out.reserve(ranked.size());
  for (const auto& [d, i] : ranked) out.push_back(i);
  return out;
}

void write_direction(Eigen::VectorXd& o, int at, const Vec2& from, const Vec2& to) {
  const Vec2 delta = to - from;
  const double dist = delta.norm();
  if (dist > 0) o.segment<2>(at) = delta / dist;
  o(at + 2) = dist;
}

}  // namespace

Action Action::clamped() const {
  return {std::clamp(ax, -1.0, 1.0), std::clamp(ay, -1.0, 1.0)};
}

Vec2 apply_action(const Vec2& pos, const Action& a, double step_length) {
  const Vec2 dir(a.ax, a.ay);
  const double n = dir.norm();
  if (n < 1e-9) return pos;
  return pos + dir / n * step_length;
}

std::vector<double> cast_lasers(const WorldState& state, int u) {
  const auto& c = state.config;
  const double cap = c.effective_view_range();
  const Vec2& p = state.uavs.at(u).pos;
  std::vector<double> out(c.num_lasers);
  for (int k = 0; k < c.num_lasers; ++k) {
    const double angle = 2.0 * std::numbers::pi * k / c.num_lasers;
    const Vec2 d(std::cos(angle), std::sin(angle));
    double t = ray_walls(p, d, c.area_width, c.area_height);
    for (const auto& ob : state.obstacles) t = std::min(t, ray_circle(p, d, ob.center, ob.radius));
    out[k] = std::min(t, cap);
  }
  return out;
}

StepEvents step(WorldState& s, std::span<const Action> actions) {
  if (s.done) throw ContractViolation("step() called on a finished episode");
  const auto& c = s.config;
  const int num_uavs = static_cast<int>(s.uavs.size());
  const int num_muavs = c.num_muavs;
  if (static_cast<int>(actions.size()) != num_uavs) {
    throw ContractViolation("step() expects one action per UAV");
  }

  StepEvents ev;
  ev.collected.assign(num_muavs, 0.0);
  ev.collected_from.resize(num_muavs);
  ev.discovered.resize(num_muavs);
  ev.distance_moved.assign(num_uavs, 0.0);
  ev.collided.assign(num_uavs, false);
  ev.min_laser.assign(num_uavs, 0.0);
  ev.charges.resize(num_uavs - num_muavs);

  // (1) motion
  for (int u = 0; u < num_uavs; ++u) {
    auto& uav = s.uavs[u];
    const Vec2 next = apply_action(uav.pos, actions[u].clamped(), c.step_length);
    uav.velocity = next - uav.pos;
    ev.distance_moved[u] = uav.velocity.norm();
    uav.pos = next;
  }

  // (2) collisions and laser readings
  bool any_collision = false;
  for (int u = 0; u < num_uavs; ++u) {
    ev.collided[u] = collides(s, s.uavs[u].pos);
    if (ev.collided[u]) {
      s.uavs[u].alive = false;
      any_collision = true;
    }
    const auto lasers = cast_lasers(s, u);
    ev.min_laser[u] = *std::min_element(lasers.begin(), lasers.end());
  }

  // (3) data collection, sequential in MUAV index order
  const double rate = quantize(c.collect_rate);
  for (int m = 0; m < num_muavs; ++m) {
    const Vec2& p = s.uavs[m].pos;
    for (int i = 0; i < static_cast<int>(s.pois.size()); ++i) {
      auto& poi = s.pois[i];
      if ((poi.pos - p).norm() > c.sense_radius) continue;
      if (!poi.discovered) {
        poi.discovered = true;
        ev.discovered[m].push_back(i);
      }
      const double amount = std::min(rate, poi.data_remaining);
      if (amount <= 0) continue;
      poi.data_remaining -= amount;
      ev.collected[m] += amount;
      ev.collected_from[m].emplace_back(i, amount);
    }
  }

  // (4) charging: each CUAV serves the single closest MUAV in range
  const double quantum = quantize(c.charge_per_step);
  const double energy0 = quantize(c.initial_energy);
  for (int ci = 0; ci < num_uavs - num_muavs; ++ci) {
    const Vec2& p = s.uavs[num_muavs + ci].pos;
    int target = -1;
    double best = kInf;
    for (int m = 0; m < num_muavs; ++m) {
      const double d = (s.uavs[m].pos - p).norm();
      if (d <= c.charge_radius && d < best) {
        best = d;
        target = m;
      }
    }
    auto& out = ev.charges[ci];
    if (target < 0) continue;
    auto& muav = s.uavs[target];
    out.target = target;
    out.delivered = std::clamp(energy0 - muav.energy_remaining, 0.0, quantum);
    out.wasted = quantum - out.delivered;
    muav.energy_remaining += out.delivered;
    muav.energy_charged += out.delivered;
  }

  // (5) MUAV energy
  bool depleted = false;
  for (int m = 0; m < num_muavs; ++m) {
    auto& muav = s.uavs[m];
    const double used = quantize(c.beta * ev.collected[m] + c.kappa * ev.distance_moved[m]);
    muav.energy_consumed += used;
    muav.energy_remaining -= used;
    if (muav.energy_remaining <= 0) depleted = true;
  }

  // (6) clock
  s.t += 1;
  if (any_collision) {
    s.cause = Termination::Collision;
  } else if (depleted) {
    s.cause = Termination::Depletion;
  } else if (s.t >= c.max_steps) {
    s.cause = Termination::MaxSteps;
  }
  s.done = s.cause != Termination::None;
  ev.terminated = s.done;
  ev.cause = s.cause;
  return ev;
}

ObservationLayout observation_layout(UavKind kind, const WorldConfig& c) {
  ObservationLayout l;
  int at = 0;
  l.lasers = at;
  at += c.num_lasers;
  l.uav_blocks = at;
  at += kObservedUavs * kUavBlockWidth;
  if (kind == UavKind::Muav) {
    l.poi_blocks = at;
    at += kObservedPois * kPoiBlockWidth;
  } else {
    l.energy_table = at;
    at += c.num_muavs * kEnergyRowWidth;
  }
  l.velocity = at;
  at += 2;
  l.position = at;
  at += 2;
  l.time = at;
  at += 1;
  if (kind == UavKind::Muav) {
    l.own_energy = at;
    at += 3;
  }
  l.type_onehot = at;
  at += kNumKinds;
  l.size = at;
  return l;
}

int max_observation_size(const WorldConfig& c) {
  int width = observation_size(UavKind::Muav, c);
  if (c.num_cuavs > 0) width = std::max(width, observation_size(UavKind::Cuav, c));
  return width;
}

Eigen::VectorXd observe(const WorldState& s, int u) {
  const auto& c = s.config;
  const auto& self = s.uavs.at(u);
  const auto layout = observation_layout(self.kind, c);
  const double view = c.effective_view_range();
  const double energy0 = quantize(c.initial_energy);
  Eigen::VectorXd o = Eigen::VectorXd::Zero(layout.size);

  const auto lasers = cast_lasers(s, u);
  for (int k = 0; k < c.num_lasers; ++k) o(layout.lasers + k) = lasers[k];

  const int num_uavs = static_cast<int>(s.uavs.size());
  const auto uav_pos = [&](int i) { return s.uavs[i].pos; };
  const auto peers = nearest_first(self.pos, num_uavs, [&](int i) { return i != u; }, uav_pos);
  for (int b = 0; b < kObservedUavs; ++b) {
    const int at = layout.uav_blocks + b * kUavBlockWidth;
    if (b < static_cast<int>(peers.size())) {
      const auto& peer = s.uavs[peers[b]];
      write_direction(o, at, self.pos, peer.pos);
      o(at + 3) = peer.kind == UavKind::Cuav ? 1.0 : 0.0;
    } else {
      o(at + 2) = view;
    }
  }

  if (self.kind == UavKind::Muav) {
    const auto poi_pos = [&](int i) { return s.pois[i].pos; };
    const auto visible = nearest_first(
        self.pos, static_cast<int>(s.pois.size()),
        [&](int i) {
          return s.pois[i].data_remaining > 0 && (s.pois[i].pos - self.pos).norm() <= view;
        },
        poi_pos);
    const int shown = std::min<int>(kObservedPois, static_cast<int>(visible.size()));
    for (int b = 0; b < shown; ++b) {
      const auto& poi = s.pois[visible[b]];
      const int at = layout.poi_blocks + b * kPoiBlockWidth;
      const Vec2 delta = poi.pos - self.pos;
      const double dist = delta.norm();
      if (dist > 0) o.segment<2>(at) = delta / dist;
      o(at + 2) = poi.data_remaining;
    }
    o(layout.own_energy) = self.energy_remaining / energy0;
    o(layout.own_energy + 1) = self.energy_charged / c.e_max;
    o(layout.own_energy + 2) = self.energy_consumed / energy0;
  } else {
    for (int m = 0; m < c.num_muavs; ++m) {
      const auto& muav = s.uavs[m];
      const int at = layout.energy_table + m * kEnergyRowWidth;
      o(at) = muav.energy_remaining / energy0;
      o(at + 1) = muav.energy_charged / c.e_max;
      write_direction(o, at + 2, self.pos, muav.pos);
    }
  }

  o.segment<2>(layout.velocity) = self.velocity / c.step_length;
  o(layout.position) = self.pos.x() / c.area_width;
  o(layout.position + 1) = self.pos.y() / c.area_height;
  o(layout.time) = static_cast<double>(s.t) / c.max_steps;
  o(layout.type_onehot + static_cast<int>(self.kind)) = 1.0;
  return o;
}

}  // namespace hgam
