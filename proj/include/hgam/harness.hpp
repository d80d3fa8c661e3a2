#pragma once

#include "hgam/env.hpp"
#include "hgam/metrics.hpp"
#include "hgam/reward.hpp"
#include "hgam/training.hpp"
#include "hgam/world.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace hgam {

enum class PolicyKind { Hgam, HgamNoGat, Greedy, Random };

const char* policy_name(PolicyKind kind);
/// Accepts hgam, hgam_no_gat, greedy, random. Throws ConfigError otherwise.
PolicyKind parse_policy_kind(const std::string& name);

/// A policy ready to act; checkpoint-backed kinds carry their model.
struct Policy {
  PolicyKind kind = PolicyKind::Greedy;
  std::optional<HgamModel> model;

  static Policy scripted(PolicyKind kind);
  static Policy from_model(HgamModel model, bool no_gat = false);
  /// Loads the checkpoint for `world`; throws CheckpointError on a missing,
  /// unreadable or shape-incompatible file.
  static Policy load(PolicyKind kind, const std::filesystem::path& checkpoint,
                     const WorldConfig& world);
};

/// Nearest-target heuristic: MUAVs head for the closest PoI with data and
/// hover while one is in sensing range; CUAVs head for the MUAV with the
/// least remaining energy and hover once it is within charging range.
Action greedy_policy(const WorldState& state, int u);

/// Components i.i.d. uniform on [-1, 1].
Action random_policy(Rng& rng);

std::vector<Action> policy_actions(const Policy& policy, const WorldState& state, Rng& rng);

struct TrajectoryRow {
  int t = 0;
  int uav_id = 0;
  UavKind kind = UavKind::Muav;
  double x = 0.0;
  double y = 0.0;
  double Er = 0.0;
  double Ec = 0.0;
  double Ed = 0.0;
  double collected = 0.0;
  int charged_to = -1;
  double reward = 0.0;
};

struct EpisodeResult {
  std::uint64_t seed = 0;
  MetricsReport metrics;
  std::vector<TrajectoryRow> trajectory;  // empty unless recorded
  std::vector<PoiState> final_pois;
  std::vector<RewardBreakdown> reward_totals;  // per UAV, summed over the episode
};

/// One noise-free episode on the scenario generated from `seed`.
EpisodeResult run_episode(const Policy& policy, const WorldConfig& world, std::uint64_t seed,
                          bool record_trajectory = false);

struct EvaluationReport {
  PolicyKind policy = PolicyKind::Greedy;
  std::uint64_t seed = 0;
  std::vector<EpisodeResult> episodes;
};

/// Episodes use seeds seed, seed+1, ... Throws ContractViolation when
/// episodes < 1.
EvaluationReport evaluate(const Policy& policy, const WorldConfig& world, int episodes,
                          std::uint64_t seed, bool record_trajectories = false);

nlohmann::json metrics_json(const MetricsReport& m);
/// Per-episode rows plus mean and (population) std of every numeric key.
nlohmann::json evaluation_json(const EvaluationReport& report);
nlohmann::json reward_components_json(const EpisodeResult& episode, const WorldConfig& world);

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows);
void write_poi_csv(std::ostream& out, const std::vector<PoiState>& pois);

}  // namespace hgam
