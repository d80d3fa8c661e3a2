#pragma once

#include "hgam/checkpoint.hpp"
#include "hgam/env.hpp"
#include "hgam/metrics.hpp"
#include "hgam/neural.hpp"
#include "hgam/replay.hpp"
#include "hgam/reward.hpp"
#include "hgam/world.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace hgam {

struct TrainConfig {
  double gamma = 0.98;
  double tau = 0.01;
  int n_step = 3;
  int f_soft = 50;
  int e_min = 50;
  int buffer_capacity = 100000;
  int batch_size = 128;
  double per_alpha = 0.6;
  double lr_critic = 0.001;
  double lr_actor = 0.0001;
  double noise_sigma0 = 0.3;
  double noise_decay = 0.9995;
  double noise_min = 0.05;
  int max_episodes = 1000;

  int embed_dim = 64;
  int head_hidden = 128;
  bool use_gat = true;
  bool share_actor_per_type = false;
  int checkpoint_every = 100;

  bool operator==(const TrainConfig&) const = default;
};

/// Throws ConfigError when an invariant of TrainConfig does not hold.
void validate(const TrainConfig& config);

/// Actors (one per UAV, or one per kind when shared) and the two per-kind
/// critics, each with target copy and optimiser state.
struct HgamModel {
  WorldConfig world;
  std::vector<nn::ParamSet> actors;
  std::vector<int> actor_of_agent;
  std::array<std::optional<nn::ParamSet>, kNumKinds> critics;

  static HgamModel create(const WorldConfig& world, const TrainConfig& train, Rng& rng);

  nn::ParamSet& actor_for(int agent) { return actors[actor_of_agent[agent]]; }
  const nn::ParamSet& actor_for(int agent) const { return actors[actor_of_agent[agent]]; }
  nn::ParamSet& critic_for(UavKind kind) { return *critics[static_cast<int>(kind)]; }
  const nn::ParamSet& critic_for(UavKind kind) const { return *critics[static_cast<int>(kind)]; }
  bool use_gat() const { return actors.front().net.shape.use_gat; }
  /// Forces g_u = 0 in every network (the no-GAT ablation).
  void disable_gat();

  std::vector<NamedTensor> to_tensors() const;
  /// Rebuilds a model for `world` from checkpoint tensors. Throws
  /// CheckpointError on missing, unexpected or mis-shaped tensors.
  static HgamModel from_tensors(const WorldConfig& world, const std::vector<NamedTensor>& tensors);

  void save(const std::filesystem::path& path) const;
  static HgamModel load(const std::filesystem::path& path, const WorldConfig& world);
};

/// Deterministic joint action from the online actors on local graphs.
std::vector<Action> act(const HgamModel& model, const WorldState& state);

/// Per-component N(0, sigma^2) draw.
Eigen::Vector2d exploration_noise(Rng& rng, double sigma);
double decay_sigma(double sigma, const TrainConfig& config);

struct TrainingBatch {
  std::vector<std::size_t> indices;
  std::vector<const Transition*> transitions;
  // per agent, per sample
  std::vector<std::vector<double>> lambda;
  std::vector<std::vector<double>> bootstrap;  // gamma^n, or 0 at episode end
  std::vector<std::vector<double>> weight;     // zeta
  std::vector<const Transition*> bootstrap_from;  // transition whose next_obs is o_{t+n}
};

/// Assembles critic/actor inputs for one agent from a set of transitions.
nn::GraphBatch local_batch(const WorldConfig& world, std::span<const Transition* const> ts, int u,
                           bool next);
nn::GraphBatch global_batch(const WorldConfig& world, std::span<const Transition* const> ts, int u,
                            bool next, const std::vector<nn::Matrix>* action_override = nullptr);

/// y = lambda + gamma^n Q'(o', a') with a' from the target actors; one row per agent.
std::vector<Eigen::VectorXd> critic_targets(const HgamModel& model, const TrainingBatch& batch);

/// zeta-weighted mean squared TD loss for one shared critic over the agents
/// of `kind`. Accumulates d(loss)/d(params) into `grads` when given and
/// writes the per-agent TD errors y - Q into `td_errors`.
double critic_loss(const HgamModel& model, UavKind kind, const TrainingBatch& batch,
                   const std::vector<Eigen::VectorXd>& targets, nn::GraphNetParams* grads,
                   std::vector<Eigen::VectorXd>* td_errors = nullptr);

/// One Adam step on the critic of `kind`; returns the loss before the step.
double critic_update(HgamModel& model, UavKind kind, const TrainingBatch& batch,
                     const std::vector<Eigen::VectorXd>& targets, double lr,
                     std::vector<Eigen::VectorXd>* td_errors = nullptr);

/// Mean Q of agent u with its buffer action replaced by the current actor
/// output. Accumulates d(-objective)/d(actor params) into `grads` when given
/// and the gradient of the mean Q w.r.t. the substituted actions (2 x B) into
/// `d_actions`.
double actor_objective(const HgamModel& model, int u, const TrainingBatch& batch,
                       nn::GraphNetParams* grads, nn::Matrix* d_actions = nullptr);

/// One Adam ascent step for every actor; returns the mean objective per agent.
std::vector<double> actor_update(HgamModel& model, const TrainingBatch& batch, double lr);

struct EpisodeStats {
  int episode = 0;
  int steps = 0;
  double reward_muav_mean = 0.0;
  double reward_cuav_mean = 0.0;
  MetricsReport metrics;
  double sigma = 0.0;
  double loss_critic_mean = 0.0;
};

struct TrainingReport {
  std::vector<EpisodeStats> episodes;
};

void write_training_report_csv(std::ostream& out, const TrainingReport& report);

class Trainer {
 public:
  Trainer(const WorldConfig& world, const TrainConfig& train, std::uint64_t seed);

  /// Plays one episode, training after each step once past e_min.
  EpisodeStats run_episode();

  /// Runs the remaining episodes up to max_episodes. Checkpoints every
  /// checkpoint_every episodes and at the end when a path is given; the path
  /// is checked for writability before the first episode.
  TrainingReport train(const std::optional<std::filesystem::path>& checkpoint_out = std::nullopt);

  const HgamModel& model() const { return model_; }
  HgamModel& model() { return model_; }
  const ReplayBuffer& buffer() const { return buffer_; }
  int episodes_done() const { return episode_; }
  double sigma() const { return sigma_; }
  long updates_done() const { return updates_; }

  /// Samples a batch and performs one actor + critic update (and priority
  /// update); returns the mean critic loss.
  double update_step();
  TrainingBatch sample_batch();

 private:
  WorldConfig world_;
  TrainConfig train_;
  std::uint64_t seed_;
  Rng rng_;
  HgamModel model_;
  ReplayBuffer buffer_;
  int episode_ = 0;
  long updates_ = 0;
  double sigma_;
};

}  // namespace hgam
