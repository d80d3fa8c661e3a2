#include "hgam/metrics.hpp"

#include "hgam/errors.hpp"

namespace hgam {

double jain_index(std::span<const double> values) {
  if (values.empty()) throw ContractViolation("jain_index of an empty list");
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double x : values) {
    if (x < 0) throw ContractViolation("jain_index input must be non-negative");
    sum += x;
    sum_sq += x * x;
  }
  if (sum_sq == 0.0) return 1.0;
  return sum * sum / (static_cast<double>(values.size()) * sum_sq);
}

EpisodeLog make_episode_log(const WorldState& state, std::vector<int> active_charging_steps) {
  EpisodeLog log;
  for (const auto& p : state.pois) log.pois.push_back({p.data_initial, p.data_remaining});
  const double energy0 = quantize(state.config.initial_energy);
  for (int m = 0; m < state.config.num_muavs; ++m) {
    const auto& u = state.uavs[m];
    log.muavs.push_back({energy0, u.energy_charged, u.energy_consumed});
  }
  log.active_charging_steps = std::move(active_charging_steps);
  log.length = state.t;
  log.e_max = state.config.e_max;
  log.terminated_by = state.cause;
  return log;
}

double data_collection_ratio(const EpisodeLog& log) {
  double total = 0.0;
  double collected = 0.0;
  for (const auto& p : log.pois) {
    total += p.data_initial;
    collected += p.data_initial - p.data_final;
  }
  if (total <= 0.0) throw UndefinedMetric("data collection ratio undefined: no data in the world");
  return collected / total;
}

double geographical_fairness(const EpisodeLog& log) {
  std::vector<double> fractions;
  for (const auto& p : log.pois) {
    if (p.data_initial > 0) fractions.push_back(p.data_final / p.data_initial);
  }
  if (fractions.empty()) throw UndefinedMetric("geographical fairness undefined: no data in the world");
  return jain_index(fractions);
}

double energy_usage_efficiency(const EpisodeLog& log) {
  if (log.muavs.empty()) return 0.0;
  double acc = 0.0;
  for (const auto& m : log.muavs) acc += m.energy_consumed / (m.energy_initial + m.energy_charged);
  return acc / static_cast<double>(log.muavs.size());
}

double charging_efficiency(const EpisodeLog& log) {
  if (log.active_charging_steps.empty()) return 0.0;
  if (log.length < 1) throw ContractViolation("episode length must be >= 1");
  double acc = 0.0;
  for (int tc : log.active_charging_steps) acc += static_cast<double>(tc) / log.length;
  return acc / static_cast<double>(log.active_charging_steps.size());
}

double charging_fairness(const EpisodeLog& log) {
  if (log.muavs.empty()) return 1.0;
  std::vector<double> fractions;
  for (const auto& m : log.muavs) fractions.push_back(m.energy_charged / log.e_max);
  return jain_index(fractions);
}

MetricsReport compute_metrics(const EpisodeLog& log) {
  MetricsReport r;
  r.C = data_collection_ratio(log);
  r.omega = geographical_fairness(log);
  r.upsilon = energy_usage_efficiency(log);
  r.D = charging_efficiency(log);
  r.F = charging_fairness(log);
  r.episode_len = log.length;
  r.terminated_by = log.terminated_by;
  return r;
}

}  // namespace hgam
