#pragma once

#include "hgam/world.hpp"

#include <Eigen/Core>

#include <span>
#include <string>
#include <vector>

namespace hgam {

/// Jain's fairness index (sum x)^2 / (n * sum x^2). All-zero input is
/// treated as perfectly fair (1). Throws ContractViolation on an empty or
/// negative input.
double jain_index(std::span<const double> values);

template <typename Derived>
double jain_index(const Eigen::DenseBase<Derived>& values) {
  const Eigen::VectorXd v = values.derived().template cast<double>();
  return jain_index(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

struct EpisodeLog {
  struct Poi {
    double data_initial = 0.0;
    double data_final = 0.0;
  };
  struct Muav {
    double energy_initial = 0.0;
    double energy_charged = 0.0;
    double energy_consumed = 0.0;
  };
  std::vector<Poi> pois;
  std::vector<Muav> muavs;
  std::vector<int> active_charging_steps;  // T_c per CUAV
  int length = 0;                          // T
  double e_max = 0.0;
  Termination terminated_by = Termination::None;
};

/// Builds a log from a (usually finished) world; T_c comes from the caller,
/// who counted steps with delivered energy > 0.
EpisodeLog make_episode_log(const WorldState& state, std::vector<int> active_charging_steps);

double data_collection_ratio(const EpisodeLog& log);   // C
double geographical_fairness(const EpisodeLog& log);   // omega
double energy_usage_efficiency(const EpisodeLog& log); // upsilon
double charging_efficiency(const EpisodeLog& log);     // D
double charging_fairness(const EpisodeLog& log);       // F

struct MetricsReport {
  double C = 0.0;
  double omega = 0.0;
  double upsilon = 0.0;
  double D = 0.0;
  double F = 0.0;
  int episode_len = 0;
  Termination terminated_by = Termination::None;

  double c_times_omega() const { return C * omega; }
  double d_times_f() const { return D * F; }
};

MetricsReport compute_metrics(const EpisodeLog& log);

}  // namespace hgam
