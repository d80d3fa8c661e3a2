#include "hgam/replay.hpp"

#include "hgam/errors.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

namespace hgam {

SumTree::SumTree(std::size_t min_leaves)
    : leaves_(std::bit_ceil(std::max<std::size_t>(min_leaves, 1))),
      sum_(2 * leaves_, 0.0),
      max_(2 * leaves_, 0.0) {}

double SumTree::priority(std::size_t leaf) const {
  if (leaf >= leaves_) throw ContractViolation("sum tree leaf out of range");
  return sum_[leaves_ + leaf];
}

void SumTree::set(std::size_t leaf, double priority) {
  if (leaf >= leaves_) throw ContractViolation("sum tree leaf out of range");
  if (!(priority >= 0.0) || !std::isfinite(priority)) {
    throw ContractViolation("sum tree priority must be finite and non-negative");
  }
  std::size_t i = leaves_ + leaf;
  sum_[i] = priority;
  max_[i] = priority;
  for (i /= 2; i >= 1; i /= 2) {
    sum_[i] = sum_[2 * i] + sum_[2 * i + 1];
    max_[i] = std::max(max_[2 * i], max_[2 * i + 1]);
  }
}

std::size_t SumTree::find(double mass) const {
  mass = std::clamp(mass, 0.0, total());
  std::size_t i = 1;
  while (i < leaves_) {
    const std::size_t left = 2 * i;
    const std::size_t right = left + 1;
    if (sum_[right] == 0.0 || (mass < sum_[left] && sum_[left] > 0.0)) {
      i = left;
    } else {
      mass -= sum_[left];
      i = right;
    }
  }
  return i - leaves_;
}

bool SumTree::consistent() const {
  for (std::size_t i = 1; i < leaves_; ++i) {
    if (sum_[i] != sum_[2 * i] + sum_[2 * i + 1]) return false;
  }
  return true;
}

std::vector<PerSample> per_sample(const SumTree& tree, int k, Rng& rng) {
  const double total = tree.total();
  if (!(total > 0.0)) throw ContractViolation("per_sample on an empty tree");
  if (k < 1) throw ContractViolation("per_sample needs k >= 1");
  const double segment = total / k;
  std::vector<PerSample> out;
  out.reserve(k);
  for (int i = 0; i < k; ++i) {
    const double mass = uniform(rng, segment * i, segment * (i + 1));
    const std::size_t leaf = tree.find(mass);
    out.push_back({leaf, tree.priority(leaf) / total});
  }
  return out;
}

void per_update(SumTree& tree, std::size_t index, double delta, double alpha, double epsilon) {
  tree.set(index, std::pow(std::abs(delta) + epsilon, alpha));
}

NStepReturn nstep_return(std::span<const double> rewards, double gamma, int n_step) {
  if (rewards.empty()) throw ContractViolation("nstep_return needs at least one reward");
  if (n_step < 1) throw ContractViolation("n_step must be >= 1");
  NStepReturn r;
  r.horizon = std::min<int>(n_step, static_cast<int>(rewards.size()));
  double discount = 1.0;
  for (int k = 0; k < r.horizon; ++k) {
    r.value += discount * rewards[k];
    discount *= gamma;
  }
  return r;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, int num_agents) : capacity_(capacity) {
  if (capacity == 0) throw ContractViolation("replay capacity must be positive");
  slots_.resize(capacity);
  trees_.assign(num_agents, SumTree(capacity));
}

std::size_t ReplayBuffer::add(Transition t) {
  const std::size_t index = cursor_;
  slots_[index] = std::move(t);
  for (auto& tree : trees_) {
    const double top = tree.max_priority();
    tree.set(index, top > 0.0 ? top : 1.0);
  }
  cursor_ = (cursor_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
  return index;
}

const Transition& ReplayBuffer::at(std::size_t index) const {
  if (index >= size_) throw ContractViolation("replay index not occupied");
  return slots_[index];
}

ReplayBuffer::NStepTarget ReplayBuffer::nstep(std::size_t index, int agent, double gamma,
                                              int n_step) const {
  const Transition& first = at(index);
  std::vector<double> rewards;
  NStepTarget out;
  std::size_t i = index;
  for (int k = 0; k < n_step; ++k) {
    const Transition& t = slots_[i];
    rewards.push_back(t.rewards.at(agent));
    out.last = i;
    if (t.done) {
      out.done = true;
      break;
    }
    const std::size_t next = (i + 1) % capacity_;
    if (next == cursor_ || next >= size_) break;  // newest stored transition
    const Transition& n = slots_[next];
    if (n.episode != first.episode || n.step != t.step + 1) break;
    i = next;
  }
  out.ret = nstep_return(rewards, gamma, n_step);
  return out;
}

}  // namespace hgam
