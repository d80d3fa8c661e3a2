#include "hgam/training.hpp"

#include "hgam/errors.hpp"
#include "hgam/hetgraph.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

namespace hgam {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError("invalid train config: " + what);
}

nn::NetShape with_train_dims(nn::NetShape shape, int embed, int hidden, bool use_gat) {
  shape.embed_dim = embed;
  shape.head_hidden = hidden;
  shape.use_gat = use_gat;
  return shape;
}

void append_param_set(std::vector<NamedTensor>& out, const std::string& prefix,
                      const nn::ParamSet& ps) {
  const auto add = [&](const std::string& part, const nn::GraphNetParams& p) {
    for (const auto& [name, t] : p.tensors()) out.push_back({prefix + "." + part + "." + name, *t});
  };
  add("online", ps.net.params);
  add("target", ps.target.params);
  add("adam_m", ps.adam.m);
  add("adam_v", ps.adam.v);
  out.push_back({prefix + ".adam_step",
                 Eigen::MatrixXd::Constant(1, 1, static_cast<double>(ps.adam.step))});
}

NamedTensor scalar_tensor(const std::string& name, double v) {
  return {name, Eigen::MatrixXd::Constant(1, 1, v)};
}

std::vector<Action> stored_or_override(const Transition& t, bool next,
                                       const std::vector<nn::Matrix>* override_actions,
                                       std::size_t column) {
  std::vector<Action> actions = t.actions;
  if (next) {
    // next-state actions only ever come from an override
    for (auto& a : actions) a = Action{};
  }
  if (override_actions) {
    for (std::size_t v = 0; v < actions.size(); ++v) {
      const auto& m = (*override_actions)[v];
      if (m.size() == 0) continue;
      actions[v] = {m(0, static_cast<Eigen::Index>(column)), m(1, static_cast<Eigen::Index>(column))};
    }
  }
  return actions;
}

}  // namespace

void validate(const TrainConfig& c) {
  require(c.gamma >= 0 && c.gamma < 1, "gamma must lie in [0, 1)");
  require(c.tau > 0 && c.tau <= 1, "tau must lie in (0, 1]");
  require(c.n_step >= 1, "n_step must be >= 1");
  require(c.f_soft >= 1, "f_soft must be >= 1");
  require(c.e_min >= 0, "e_min must be >= 0");
  require(c.buffer_capacity >= 1, "buffer_capacity must be >= 1");
  require(c.batch_size >= 1, "batch_size must be >= 1");
  require(c.per_alpha >= 0, "per_alpha must be >= 0");
  require(c.lr_critic > 0 && c.lr_actor > 0, "learning rates must be positive");
  require(c.noise_sigma0 >= 0 && c.noise_min >= 0, "noise scales must be non-negative");
  require(c.noise_decay > 0 && c.noise_decay <= 1, "noise_decay must lie in (0, 1]");
  require(c.max_episodes >= 0, "max_episodes must be >= 0");
  require(c.embed_dim >= 1 && c.head_hidden >= 1, "network widths must be >= 1");
  require(c.checkpoint_every >= 1, "checkpoint_every must be >= 1");
}

// ---------------------------------------------------------------- model

HgamModel HgamModel::create(const WorldConfig& world, const TrainConfig& train, Rng& rng) {
  validate(world);
  HgamModel m;
  m.world = world;
  const auto actor = with_train_dims(nn::actor_shape(world), train.embed_dim, train.head_hidden,
                                     train.use_gat);
  const auto critic = with_train_dims(nn::critic_shape(world), train.embed_dim, train.head_hidden,
                                      train.use_gat);
  const int num_uavs = world.num_uavs();
  if (train.share_actor_per_type) {
    std::array<int, kNumKinds> slot{-1, -1};
    for (int u = 0; u < num_uavs; ++u) {
      const int k = u < world.num_muavs ? 0 : 1;
      if (slot[k] < 0) {
        slot[k] = static_cast<int>(m.actors.size());
        m.actors.push_back(nn::ParamSet::create(actor, rng));
      }
      m.actor_of_agent.push_back(slot[k]);
    }
  } else {
    for (int u = 0; u < num_uavs; ++u) {
      m.actors.push_back(nn::ParamSet::create(actor, rng));
      m.actor_of_agent.push_back(u);
    }
  }
  m.critics[0] = nn::ParamSet::create(critic, rng);
  if (world.num_cuavs > 0) m.critics[1] = nn::ParamSet::create(critic, rng);
  return m;
}

void HgamModel::disable_gat() {
  for (auto& a : actors) {
    a.net.shape.use_gat = false;
    a.target.shape.use_gat = false;
  }
  for (auto& c : critics) {
    if (!c) continue;
    c->net.shape.use_gat = false;
    c->target.shape.use_gat = false;
  }
}

std::vector<NamedTensor> HgamModel::to_tensors() const {
  std::vector<NamedTensor> out;
  const auto& shape = actors.front().net.shape;
  out.push_back(scalar_tensor("meta.embed_dim", shape.embed_dim));
  out.push_back(scalar_tensor("meta.head_hidden", shape.head_hidden));
  out.push_back(scalar_tensor("meta.use_gat", shape.use_gat ? 1.0 : 0.0));
  out.push_back(scalar_tensor("meta.share_actor_per_type",
                              actors.size() < actor_of_agent.size() ? 1.0 : 0.0));
  for (std::size_t i = 0; i < actors.size(); ++i) {
    append_param_set(out, "actor." + std::to_string(i), actors[i]);
  }
  for (int k = 0; k < kNumKinds; ++k) {
    if (critics[k]) append_param_set(out, std::string("critic.") + kind_name(UavKind(k)), *critics[k]);
  }
  return out;
}

HgamModel HgamModel::from_tensors(const WorldConfig& world,
                                  const std::vector<NamedTensor>& tensors) {
  std::map<std::string, const Eigen::MatrixXd*> by_name;
  for (const auto& t : tensors) {
    if (!by_name.emplace(t.name, &t.value).second) {
      throw CheckpointError("duplicate tensor in checkpoint: " + t.name);
    }
  }
  const auto meta = [&](const std::string& name) {
    const auto it = by_name.find(name);
    if (it == by_name.end() || it->second->size() != 1) {
      throw CheckpointError("checkpoint lacks scalar " + name);
    }
    return (*it->second)(0, 0);
  };
  TrainConfig train;
  train.embed_dim = static_cast<int>(meta("meta.embed_dim"));
  train.head_hidden = static_cast<int>(meta("meta.head_hidden"));
  train.use_gat = meta("meta.use_gat") != 0.0;
  train.share_actor_per_type = meta("meta.share_actor_per_type") != 0.0;
  if (train.embed_dim < 1 || train.head_hidden < 1) throw CheckpointError("bad network widths");

  Rng scratch(0);
  HgamModel model = create(world, train, scratch);
  auto expected = model.to_tensors();
  std::set<std::string> seen;
  for (auto& e : expected) {
    const auto it = by_name.find(e.name);
    if (it == by_name.end()) throw CheckpointError("checkpoint lacks tensor " + e.name);
    if (it->second->rows() != e.value.rows() || it->second->cols() != e.value.cols()) {
      throw CheckpointError("shape mismatch for " + e.name + ": checkpoint has " +
                            std::to_string(it->second->rows()) + "x" +
                            std::to_string(it->second->cols()) + ", config expects " +
                            std::to_string(e.value.rows()) + "x" + std::to_string(e.value.cols()));
    }
    seen.insert(e.name);
  }
  for (const auto& [name, value] : by_name) {
    if (!seen.count(name)) throw CheckpointError("unexpected tensor in checkpoint: " + name);
  }

  const auto fill = [&](const std::string& prefix, nn::ParamSet& ps) {
    const auto load = [&](const std::string& part, nn::GraphNetParams& p) {
      for (auto& [name, t] : p.tensors()) *t = *by_name.at(prefix + "." + part + "." + name);
    };
    load("online", ps.net.params);
    load("target", ps.target.params);
    load("adam_m", ps.adam.m);
    load("adam_v", ps.adam.v);
    ps.adam.step = static_cast<long>((*by_name.at(prefix + ".adam_step"))(0, 0));
  };
  for (std::size_t i = 0; i < model.actors.size(); ++i) {
    fill("actor." + std::to_string(i), model.actors[i]);
  }
  for (int k = 0; k < kNumKinds; ++k) {
    if (model.critics[k]) fill(std::string("critic.") + kind_name(UavKind(k)), *model.critics[k]);
  }
  return model;
}

void HgamModel::save(const std::filesystem::path& path) const { write_checkpoint(path, to_tensors()); }

HgamModel HgamModel::load(const std::filesystem::path& path, const WorldConfig& world) {
  return from_tensors(world, read_checkpoint(path));
}

std::vector<Action> act(const HgamModel& model, const WorldState& state) {
  std::vector<Eigen::VectorXd> obs;
  for (int u = 0; u < static_cast<int>(state.uavs.size()); ++u) obs.push_back(observe(state, u));
  const FleetView fleet = fleet_view(state);
  std::vector<Action> out;
  for (int u = 0; u < fleet.size(); ++u) {
    out.push_back(nn::actor_forward(model.actor_for(u).net,
                                    build_local_graph(fleet, u, obs, state.config)));
  }
  return out;
}

Eigen::Vector2d exploration_noise(Rng& rng, double sigma) {
  if (sigma <= 0) return Eigen::Vector2d::Zero();
  std::normal_distribution<double> normal(0.0, sigma);
  const double x = normal(rng);
  const double y = normal(rng);
  return {x, y};
}

double decay_sigma(double sigma, const TrainConfig& config) {
  return std::max(config.noise_min, sigma * config.noise_decay);
}

// ---------------------------------------------------------------- batches

nn::GraphBatch local_batch(const WorldConfig& world, std::span<const Transition* const> ts, int u,
                           bool next) {
  std::vector<HeteroGraph> graphs;
  graphs.reserve(ts.size());
  FleetView fleet;
  for (int v = 0; v < world.num_uavs(); ++v) {
    fleet.kinds.push_back(v < world.num_muavs ? UavKind::Muav : UavKind::Cuav);
  }
  for (const Transition* t : ts) {
    fleet.positions = next ? t->next_positions : t->positions;
    graphs.push_back(build_local_graph(fleet, u, next ? t->next_obs : t->obs, world));
  }
  return nn::batch_graphs(graphs);
}

nn::GraphBatch global_batch(const WorldConfig& world, std::span<const Transition* const> ts, int u,
                            bool next, const std::vector<nn::Matrix>* action_override) {
  std::vector<HeteroGraph> graphs;
  graphs.reserve(ts.size());
  FleetView fleet;
  for (int v = 0; v < world.num_uavs(); ++v) {
    fleet.kinds.push_back(v < world.num_muavs ? UavKind::Muav : UavKind::Cuav);
  }
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const Transition* t = ts[i];
    fleet.positions = next ? t->next_positions : t->positions;
    const auto actions = stored_or_override(*t, next, action_override, i);
    auto views = build_global_graph(fleet, next ? t->next_obs : t->obs, actions, world);
    graphs.push_back(std::move(views[u]));
  }
  return nn::batch_graphs(graphs);
}

std::vector<Eigen::VectorXd> critic_targets(const HgamModel& model, const TrainingBatch& batch) {
  const WorldConfig& world = model.world;
  const int num_uavs = world.num_uavs();
  const auto& from = batch.bootstrap_from;
  std::vector<nn::Matrix> next_actions(num_uavs);
  for (int v = 0; v < num_uavs; ++v) {
    next_actions[v] = nn::forward(model.actor_for(v).target, local_batch(world, from, v, true));
  }
  std::vector<Eigen::VectorXd> y(num_uavs);
  for (int u = 0; u < num_uavs; ++u) {
    const UavKind kind = u < world.num_muavs ? UavKind::Muav : UavKind::Cuav;
    const nn::Matrix q_next = nn::forward(model.critic_for(kind).target,
                                          global_batch(world, from, u, true, &next_actions));
    y[u].resize(static_cast<Eigen::Index>(from.size()));
    for (std::size_t i = 0; i < from.size(); ++i) {
      const auto col = static_cast<Eigen::Index>(i);
      y[u](col) = batch.lambda[u][i] + batch.bootstrap[u][i] * q_next(0, col);
    }
  }
  return y;
}

double critic_loss(const HgamModel& model, UavKind kind, const TrainingBatch& batch,
                   const std::vector<Eigen::VectorXd>& targets, nn::GraphNetParams* grads,
                   std::vector<Eigen::VectorXd>* td_errors) {
  const WorldConfig& world = model.world;
  const auto& critic = model.critic_for(kind).net;
  std::vector<int> agents;
  for (int u = 0; u < world.num_uavs(); ++u) {
    if ((u < world.num_muavs) == (kind == UavKind::Muav)) agents.push_back(u);
  }
  if (td_errors) td_errors->resize(world.num_uavs());
  const auto cols = static_cast<Eigen::Index>(batch.transitions.size());
  const double scale = 1.0 / (static_cast<double>(agents.size()) * static_cast<double>(cols));
  double loss = 0.0;
  for (int u : agents) {
    nn::ForwardCache cache;
    const nn::Matrix q = nn::forward(critic, global_batch(world, batch.transitions, u, false), &cache);
    nn::Matrix d_out(1, cols);
    Eigen::VectorXd td(cols);
    for (Eigen::Index i = 0; i < cols; ++i) {
      const double zeta = batch.weight[u][static_cast<std::size_t>(i)];
      td(i) = targets[u](i) - q(0, i);
      loss += scale * zeta * td(i) * td(i);
      d_out(0, i) = -2.0 * scale * zeta * td(i);
    }
    if (grads) nn::backward(critic, cache, d_out, grads);
    if (td_errors) (*td_errors)[u] = std::move(td);
  }
  return loss;
}

double critic_update(HgamModel& model, UavKind kind, const TrainingBatch& batch,
                     const std::vector<Eigen::VectorXd>& targets, double lr,
                     std::vector<Eigen::VectorXd>* td_errors) {
  auto& critic = model.critic_for(kind);
  auto grads = nn::GraphNetParams::zeros(critic.net.shape);
  const double loss = critic_loss(model, kind, batch, targets, &grads, td_errors);
  nn::adam_step(critic.net.params, grads, critic.adam, lr);
  return loss;
}

double actor_objective(const HgamModel& model, int u, const TrainingBatch& batch,
                       nn::GraphNetParams* grads, nn::Matrix* d_actions) {
  const WorldConfig& world = model.world;
  const auto& actor = model.actor_for(u).net;
  const UavKind kind = u < world.num_muavs ? UavKind::Muav : UavKind::Cuav;
  const auto& critic = model.critic_for(kind).net;
  const auto cols = static_cast<Eigen::Index>(batch.transitions.size());

  nn::ForwardCache actor_cache;
  const nn::Matrix mu = nn::forward(actor, local_batch(world, batch.transitions, u, false), &actor_cache);
  std::vector<nn::Matrix> override_actions(world.num_uavs());
  override_actions[u] = mu;

  nn::ForwardCache critic_cache;
  const nn::Matrix q = nn::forward(
      critic, global_batch(world, batch.transitions, u, false, &override_actions), &critic_cache);
  const double objective = q.mean();

  nn::InputGradients inputs;
  nn::backward(critic, critic_cache, nn::Matrix::Constant(1, cols, 1.0 / cols), nullptr, &inputs);
  const nn::Matrix dq_da = inputs.ego.middleRows(action_offset(world), 2);
  if (d_actions) *d_actions = dq_da;
  if (grads) nn::backward(actor, actor_cache, -dq_da, grads);
  return objective;
}

std::vector<double> actor_update(HgamModel& model, const TrainingBatch& batch, double lr) {
  const int num_uavs = model.world.num_uavs();
  std::vector<nn::GraphNetParams> grads;
  for (const auto& a : model.actors) grads.push_back(nn::GraphNetParams::zeros(a.net.shape));
  std::vector<double> objectives;
  for (int u = 0; u < num_uavs; ++u) {
    objectives.push_back(actor_objective(model, u, batch, &grads[model.actor_of_agent[u]]));
  }
  for (std::size_t i = 0; i < model.actors.size(); ++i) {
    nn::adam_step(model.actors[i].net.params, grads[i], model.actors[i].adam, lr);
  }
  return objectives;
}

// ---------------------------------------------------------------- report

void write_training_report_csv(std::ostream& out, const TrainingReport& report) {
  out << "episode,steps,reward_muav_mean,reward_cuav_mean,C,omega,upsilon,D,F,sigma,"
         "loss_critic_mean\n";
  char line[512];
  for (const auto& e : report.episodes) {
    std::snprintf(line, sizeof line, "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  e.episode, e.steps, e.reward_muav_mean, e.reward_cuav_mean, e.metrics.C,
                  e.metrics.omega, e.metrics.upsilon, e.metrics.D, e.metrics.F, e.sigma,
                  e.loss_critic_mean);
    out << line;
  }
}

// ---------------------------------------------------------------- trainer

Trainer::Trainer(const WorldConfig& world, const TrainConfig& train, std::uint64_t seed)
    : world_(world),
      train_(train),
      seed_(seed),
      rng_(seed),
      model_((validate(world), validate(train), HgamModel::create(world, train, rng_))),
      buffer_(static_cast<std::size_t>(train.buffer_capacity), world.num_uavs()),
      sigma_(train.noise_sigma0) {}

TrainingBatch Trainer::sample_batch() {
  const int num_uavs = world_.num_uavs();
  const int driver = static_cast<int>(updates_ % num_uavs);
  const auto samples = per_sample(buffer_.tree(driver), train_.batch_size, rng_);

  TrainingBatch b;
  b.lambda.assign(num_uavs, {});
  b.bootstrap.assign(num_uavs, {});
  b.weight.assign(num_uavs, {});
  for (const auto& s : samples) {
    b.indices.push_back(s.index);
    b.transitions.push_back(&buffer_.at(s.index));
    for (int u = 0; u < num_uavs; ++u) {
      const auto target = buffer_.nstep(s.index, u, train_.gamma, train_.n_step);
      if (u == 0) b.bootstrap_from.push_back(&buffer_.at(target.last));
      b.lambda[u].push_back(target.ret.value);
      b.bootstrap[u].push_back(target.done ? 0.0 : std::pow(train_.gamma, target.ret.horizon));
      const auto& tree = buffer_.tree(u);
      b.weight[u].push_back(tree.priority(s.index) / tree.total());
    }
  }
  return b;
}

double Trainer::update_step() {
  const TrainingBatch batch = sample_batch();
  const auto targets = critic_targets(model_, batch);

  actor_update(model_, batch, train_.lr_actor);

  std::vector<Eigen::VectorXd> td(world_.num_uavs());
  double loss = 0.0;
  int critics = 0;
  for (int k = 0; k < kNumKinds; ++k) {
    if (!model_.critics[k]) continue;
    std::vector<Eigen::VectorXd> td_kind;
    loss += critic_update(model_, UavKind(k), batch, targets, train_.lr_critic, &td_kind);
    for (int u = 0; u < world_.num_uavs(); ++u) {
      if (td_kind[u].size() > 0) td[u] = std::move(td_kind[u]);
    }
    ++critics;
  }

  if (episode_ % train_.f_soft == 0) {
    for (auto& a : model_.actors) nn::soft_update(a.target.params, a.net.params, train_.tau);
    for (auto& c : model_.critics) {
      if (c) nn::soft_update(c->target.params, c->net.params, train_.tau);
    }
  }

  for (int u = 0; u < world_.num_uavs(); ++u) {
    for (std::size_t i = 0; i < batch.indices.size(); ++i) {
      per_update(buffer_.tree(u), batch.indices[i], td[u](static_cast<Eigen::Index>(i)),
                 train_.per_alpha);
    }
  }
  ++updates_;
  return loss / std::max(critics, 1);
}

EpisodeStats Trainer::run_episode() {
  ++episode_;
  WorldState state = generate_scenario(world_, rng_());
  RewardTracker tracker(state);
  const int num_uavs = world_.num_uavs();
  std::vector<int> active(world_.num_cuavs, 0);
  std::vector<double> returns(num_uavs, 0.0);
  double loss_sum = 0.0;
  int loss_count = 0;

  std::vector<Eigen::VectorXd> obs;
  for (int u = 0; u < num_uavs; ++u) obs.push_back(observe(state, u));

  while (!state.done) {
    std::vector<Action> actions = act(model_, state);
    for (auto& a : actions) {
      const Eigen::Vector2d noise = exploration_noise(rng_, sigma_);
      a = Action{a.ax + noise.x(), a.ay + noise.y()}.clamped();
    }
    Transition t;
    t.obs = obs;
    t.actions = actions;
    t.episode = episode_;
    t.step = state.t;
    for (const auto& u : state.uavs) t.positions.push_back(u.pos);

    const StepEvents events = step(state, actions);
    const auto rewards = tracker.on_step(state, events);
    for (int c = 0; c < world_.num_cuavs; ++c) {
      if (events.charges[c].delivered > 0) ++active[c];
    }
    for (int u = 0; u < num_uavs; ++u) {
      t.rewards.push_back(rewards[u].total);
      returns[u] += rewards[u].total;
    }
    obs.clear();
    for (int u = 0; u < num_uavs; ++u) obs.push_back(observe(state, u));
    t.next_obs = obs;
    for (const auto& u : state.uavs) t.next_positions.push_back(u.pos);
    t.done = state.done;
    buffer_.add(std::move(t));

    if (episode_ > train_.e_min) {
      loss_sum += update_step();
      ++loss_count;
    }
  }

  EpisodeStats stats;
  stats.episode = episode_;
  stats.steps = state.t;
  for (int m = 0; m < world_.num_muavs; ++m) stats.reward_muav_mean += returns[m];
  stats.reward_muav_mean /= world_.num_muavs;
  if (world_.num_cuavs > 0) {
    for (int c = 0; c < world_.num_cuavs; ++c) stats.reward_cuav_mean += returns[world_.num_muavs + c];
    stats.reward_cuav_mean /= world_.num_cuavs;
  }
  stats.metrics = compute_metrics(make_episode_log(state, active));
  stats.sigma = sigma_;
  stats.loss_critic_mean = loss_count > 0 ? loss_sum / loss_count : 0.0;
  sigma_ = decay_sigma(sigma_, train_);
  return stats;
}

TrainingReport Trainer::train(const std::optional<std::filesystem::path>& checkpoint_out) {
  if (checkpoint_out) {
    std::ofstream probe(*checkpoint_out, std::ios::binary | std::ios::app);
    if (!probe) throw CheckpointError("checkpoint path is not writable: " + checkpoint_out->string());
  }
  TrainingReport report;
  while (episode_ < train_.max_episodes) {
    report.episodes.push_back(run_episode());
    if (checkpoint_out && episode_ % train_.checkpoint_every == 0) model_.save(*checkpoint_out);
  }
  if (checkpoint_out) model_.save(*checkpoint_out);
  return report;
}

}  // namespace hgam
