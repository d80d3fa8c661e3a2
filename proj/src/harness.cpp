#include "hgam/harness.hpp"

#include "hgam/errors.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace hgam {

const char* policy_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::Hgam: return "hgam";
    case PolicyKind::HgamNoGat: return "hgam_no_gat";
    case PolicyKind::Greedy: return "greedy";
    case PolicyKind::Random: return "random";
  }
  return "?";
}

PolicyKind parse_policy_kind(const std::string& name) {
  for (auto k : {PolicyKind::Hgam, PolicyKind::HgamNoGat, PolicyKind::Greedy, PolicyKind::Random}) {
    if (name == policy_name(k)) return k;
  }
  throw ConfigError("unknown policy '" + name + "' (expected hgam, hgam_no_gat, greedy or random)");
}

Policy Policy::scripted(PolicyKind kind) {
  if (kind == PolicyKind::Hgam || kind == PolicyKind::HgamNoGat) {
    throw ConfigError(std::string(policy_name(kind)) + " policy needs a checkpoint");
  }
  Policy p;
  p.kind = kind;
  return p;
}

Policy Policy::from_model(HgamModel model, bool no_gat) {
  Policy p;
  p.kind = no_gat ? PolicyKind::HgamNoGat : PolicyKind::Hgam;
  if (no_gat) model.disable_gat();
  p.model = std::move(model);
  return p;
}

Policy Policy::load(PolicyKind kind, const std::filesystem::path& checkpoint,
                    const WorldConfig& world) {
  if (kind != PolicyKind::Hgam && kind != PolicyKind::HgamNoGat) return scripted(kind);
  return from_model(HgamModel::load(checkpoint, world), kind == PolicyKind::HgamNoGat);
}

namespace {

Action toward(const Vec2& from, const Vec2& to) {
  const Vec2 d = to - from;
  const double n = d.norm();
  if (n == 0.0) return {};
  return Action{d.x() / n, d.y() / n}.clamped();
}

}  // namespace

Action greedy_policy(const WorldState& state, int u) {
  const auto& c = state.config;
  const Vec2& p = state.uavs[u].pos;
  if (state.is_muav(u)) {
    int best = -1;
    double best_d = 0.0;
    for (int i = 0; i < static_cast<int>(state.pois.size()); ++i) {
      const auto& poi = state.pois[i];
      if (poi.data_remaining <= 0.0) continue;
      const double d = (poi.pos - p).norm();
      if (d <= c.sense_radius) return {};
      if (best < 0 || d < best_d) {
        best = i;
        best_d = d;
      }
    }
    return best < 0 ? Action{} : toward(p, state.pois[best].pos);
  }
  int target = 0;
  for (int m = 1; m < c.num_muavs; ++m) {
    if (state.uavs[m].energy_remaining < state.uavs[target].energy_remaining) target = m;
  }
  const Vec2& q = state.uavs[target].pos;
  if ((q - p).norm() <= c.charge_radius) return {};
  return toward(p, q);
}

Action random_policy(Rng& rng) { return {uniform(rng, -1.0, 1.0), uniform(rng, -1.0, 1.0)}; }

std::vector<Action> policy_actions(const Policy& policy, const WorldState& state, Rng& rng) {
  const int n = static_cast<int>(state.uavs.size());
  std::vector<Action> out;
  switch (policy.kind) {
    case PolicyKind::Hgam:
    case PolicyKind::HgamNoGat:
      if (!policy.model) throw ContractViolation("model-backed policy without a model");
      return act(*policy.model, state);
    case PolicyKind::Greedy:
      for (int u = 0; u < n; ++u) out.push_back(greedy_policy(state, u));
      return out;
    case PolicyKind::Random:
      for (int u = 0; u < n; ++u) out.push_back(random_policy(rng));
      return out;
  }
  return out;
}

EpisodeResult run_episode(const Policy& policy, const WorldConfig& world, std::uint64_t seed,
                          bool record_trajectory) {
  validate(world);
  if (policy.model && !(policy.model->world == world)) {
    throw CheckpointError("model was built for a different world config");
  }
  WorldState state = generate_scenario(world, seed);
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  RewardTracker tracker(state);
  const int n = world.num_uavs();
  std::vector<int> active(world.num_cuavs, 0);

  EpisodeResult result;
  result.seed = seed;
  result.reward_totals.assign(n, RewardBreakdown{});

  const auto record = [&](const StepEvents* events, const std::vector<RewardBreakdown>* rewards) {
    for (int u = 0; u < n; ++u) {
      const auto& s = state.uavs[u];
      TrajectoryRow r;
      r.t = state.t;
      r.uav_id = u;
      r.kind = s.kind;
      r.x = s.pos.x();
      r.y = s.pos.y();
      r.Er = s.energy_remaining;
      r.Ec = s.energy_charged;
      r.Ed = s.energy_consumed;
      if (events) {
        if (state.is_muav(u)) {
          r.collected = events->collected[u];
        } else {
          r.charged_to = events->charges[u - world.num_muavs].target;
        }
        r.reward = (*rewards)[u].total;
      }
      result.trajectory.push_back(r);
    }
  };
  if (record_trajectory) record(nullptr, nullptr);

  while (!state.done) {
    const auto actions = policy_actions(policy, state, rng);
    const StepEvents events = step(state, actions);
    const auto rewards = tracker.on_step(state, events);
    for (int c = 0; c < world.num_cuavs; ++c) {
      if (events.charges[c].delivered > 0) ++active[c];
    }
    for (int u = 0; u < n; ++u) result.reward_totals[u] += rewards[u];
    if (record_trajectory) record(&events, &rewards);
  }
  result.metrics = compute_metrics(make_episode_log(state, active));
  result.final_pois = state.pois;
  return result;
}

EvaluationReport evaluate(const Policy& policy, const WorldConfig& world, int episodes,
                          std::uint64_t seed, bool record_trajectories) {
  if (episodes < 1) throw ContractViolation("evaluate needs at least one episode");
  EvaluationReport report;
  report.policy = policy.kind;
  report.seed = seed;
  for (int i = 0; i < episodes; ++i) {
    report.episodes.push_back(run_episode(policy, world, seed + static_cast<std::uint64_t>(i),
                                          record_trajectories));
  }
  return report;
}

nlohmann::json metrics_json(const MetricsReport& m) {
  return {{"C", m.C},
          {"omega", m.omega},
          {"upsilon", m.upsilon},
          {"D", m.D},
          {"F", m.F},
          {"C_times_omega", m.c_times_omega()},
          {"D_times_F", m.d_times_f()},
          {"episode_len", m.episode_len},
          {"terminated_by", termination_name(m.terminated_by)}};
}

nlohmann::json evaluation_json(const EvaluationReport& report) {
  static const char* keys[] = {"C", "omega", "upsilon", "D", "F",
                               "C_times_omega", "D_times_F", "episode_len"};
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& e : report.episodes) {
    auto row = metrics_json(e.metrics);
    row["seed"] = e.seed;
    rows.push_back(std::move(row));
  }
  nlohmann::json mean = nlohmann::json::object();
  nlohmann::json stddev = nlohmann::json::object();
  const double n = static_cast<double>(report.episodes.size());
  for (const char* k : keys) {
    double sum = 0.0;
    for (const auto& r : rows) sum += r[k].get<double>();
    const double mu = sum / n;
    double sq = 0.0;
    for (const auto& r : rows) sq += (r[k].get<double>() - mu) * (r[k].get<double>() - mu);
    mean[k] = mu;
    stddev[k] = std::sqrt(sq / n);
  }
  return {{"policy", policy_name(report.policy)},
          {"seed", report.seed},
          {"episodes", rows},
          {"mean", mean},
          {"std", stddev}};
}

nlohmann::json reward_components_json(const EpisodeResult& episode, const WorldConfig& world) {
  nlohmann::json uavs = nlohmann::json::array();
  for (int u = 0; u < static_cast<int>(episode.reward_totals.size()); ++u) {
    const auto& r = episode.reward_totals[u];
    uavs.push_back({{"uav_id", u},
                    {"kind", kind_name(u < world.num_muavs ? UavKind::Muav : UavKind::Cuav)},
                    {"h", r.h},
                    {"iota", r.iota},
                    {"pl", r.pl},
                    {"pb", r.pb},
                    {"total", r.total}});
  }
  return {{"seed", episode.seed}, {"uavs", uavs}};
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows) {
  out << "t,uav_id,kind,x,y,Er,Ec,Ed,collected,charged_to,reward\n";
  char line[512];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%d,%d,%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%.17g\n",
                  r.t, r.uav_id, kind_name(r.kind), r.x, r.y, r.Er, r.Ec, r.Ed, r.collected,
                  r.charged_to, r.reward);
    out << line;
  }
}

void write_poi_csv(std::ostream& out, const std::vector<PoiState>& pois) {
  out << "poi_id,x,y,m0,m_final\n";
  char line[256];
  for (std::size_t i = 0; i < pois.size(); ++i) {
    const auto& p = pois[i];
    std::snprintf(line, sizeof line, "%zu,%.17g,%.17g,%.17g,%.17g\n", i, p.pos.x(), p.pos.y(),
                  p.data_initial, p.data_remaining);
    out << line;
  }
}

}  // namespace hgam
