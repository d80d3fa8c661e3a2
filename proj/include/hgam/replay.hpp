#pragma once

#include "hgam/env.hpp"
#include "hgam/world.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

namespace hgam {

/// Binary sum tree over a power-of-two number of leaves. Internal nodes are
/// recomputed from their children on every write, so each one equals the
/// sum of its children exactly. A parallel max tree gives the largest leaf.
class SumTree {
 public:
  explicit SumTree(std::size_t min_leaves);

  std::size_t capacity() const { return leaves_; }
  double total() const { return sum_[1]; }
  double max_priority() const { return max_[1]; }
  double priority(std::size_t leaf) const;

  /// Throws ContractViolation for a leaf outside the tree or a negative/non-finite priority.
  void set(std::size_t leaf, double priority);

  /// Leaf whose cumulative-priority interval contains `mass` (clamped to [0, total)).
  std::size_t find(double mass) const;

  /// Every internal node equals the sum of its two children (bitwise).
  bool consistent() const;

 private:
  std::size_t leaves_;
  std::vector<double> sum_;  // 1-based heap layout, leaves at [leaves_, 2*leaves_)
  std::vector<double> max_;
};

struct PerSample {
  std::size_t index = 0;
  double probability = 0.0;
};

/// Stratified proportional sampling: one uniform draw in each of k equal
/// slices of the total mass. Stored priorities are already raised to alpha.
std::vector<PerSample> per_sample(const SumTree& tree, int k, Rng& rng);

inline constexpr double kPriorityEpsilon = 1e-4;

/// priority <- (|delta| + epsilon)^alpha
void per_update(SumTree& tree, std::size_t index, double delta, double alpha,
                double epsilon = kPriorityEpsilon);

struct NStepReturn {
  double value = 0.0;  // lambda
  int horizon = 0;     // rewards actually summed
};

/// sum_{k<n} gamma^k r_k with n = min(N, rewards.size()).
NStepReturn nstep_return(std::span<const double> rewards, double gamma, int n_step);

struct Transition {
  std::vector<Eigen::VectorXd> obs;
  std::vector<Action> actions;
  std::vector<double> rewards;
  std::vector<Eigen::VectorXd> next_obs;
  std::vector<Vec2> positions;
  std::vector<Vec2> next_positions;
  bool done = false;
  long episode = 0;
  int step = 0;
};

/// FIFO transition store shared by all agents, with one priority tree per
/// agent indexing the same slots.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, int num_agents);

  /// Stores the transition (overwriting the oldest when full). Every tree
  /// gives the new slot its current maximum priority (1 when empty).
  std::size_t add(Transition t);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  int num_agents() const { return static_cast<int>(trees_.size()); }
  const Transition& at(std::size_t index) const;
  SumTree& tree(int agent) { return trees_.at(agent); }
  const SumTree& tree(int agent) const { return trees_.at(agent); }

  struct NStepTarget {
    NStepReturn ret;
    bool done = false;          // an episode end was reached within the horizon
    std::size_t last = 0;       // slot of the last transition summed
  };
  /// Walks forward from `index` through consecutive steps of the same
  /// episode, up to n_step transitions or the episode end.
  NStepTarget nstep(std::size_t index, int agent, double gamma, int n_step) const;

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::size_t cursor_ = 0;
  std::vector<Transition> slots_;
  std::vector<SumTree> trees_;
};

}  // namespace hgam
