#pragma once

#include <stdexcept>
#include <string>

namespace hgam {

/// Invalid configuration value or configuration file.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an operation's precondition (stepping a finished episode,
/// negative Jain input, out-of-range replay index, ...).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Rejection sampling could not place the scenario.
class ScenarioInfeasible : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Checkpoint missing, corrupt, or incompatible with the configuration.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Metric is undefined for the given log (e.g. no data in the world).
class UndefinedMetric : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace hgam
