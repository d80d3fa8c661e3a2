#pragma once

#include "hgam/env.hpp"
#include "hgam/world.hpp"

#include <deque>
#include <vector>

namespace hgam {

/// One agent's reward split into its terms. For MUAVs total = h + iota - pl - pb
/// (iota is a bonus); for CUAVs total = h - iota - pl - pb (iota is the
/// neglect penalty, stored non-negative).
struct RewardBreakdown {
  double h = 0.0;
  double iota = 0.0;
  double pl = 0.0;
  double pb = 0.0;
  double total = 0.0;

  RewardBreakdown& operator+=(const RewardBreakdown& o) {
    h += o.h;
    iota += o.iota;
    pl += o.pl;
    pb += o.pb;
    total += o.total;
    return *this;
  }
};

/// Last W positions of one MUAV, oldest first.
class DilemmaWindow {
 public:
  explicit DilemmaWindow(int capacity = 10) : capacity_(capacity) {}

  void push(const Vec2& p) {
    positions_.push_back(p);
    if (static_cast<int>(positions_.size()) > capacity_) positions_.pop_front();
  }
  void clear() { positions_.clear(); }
  int size() const { return static_cast<int>(positions_.size()); }
  int capacity() const { return capacity_; }
  const std::deque<Vec2>& positions() const { return positions_; }

 private:
  int capacity_;
  std::deque<Vec2> positions_;
};

/// True when some later position in the window overlaps the oldest one more
/// than its immediate successor does, i.e. the MUAV came back around.
bool detect_dilemma(const DilemmaWindow& window, double sense_radius);

/// w_f * Jain(min(Ec/Emax, 1)) + (1 - w_f) * Jain(Er) over the MUAVs.
double fairness_factor(const WorldState& state);

RewardBreakdown muav_reward(const StepEvents& events, bool dilemma, int m,
                            const WorldConfig& config);

/// w_d * distance-to-neediest + w_e * Er(neediest); the neediest MUAV is the
/// one with the lowest remaining energy (ties to the lower index).
double cuav_neglect_penalty(const WorldState& state, int c, const WorldConfig& config);

/// `c` indexes CUAVs (0-based among CUAVs).
double cuav_hierarchical_penalty(const WorldState& state, int c, const ChargeOutcome& outcome,
                                 const WorldConfig& config);

RewardBreakdown cuav_reward(const WorldState& state, const StepEvents& events, int c,
                            const WorldConfig& config);

/// Per-episode reward bookkeeping: keeps the dilemma windows and turns each
/// step's events into one breakdown per UAV.
class RewardTracker {
 public:
  explicit RewardTracker(const WorldState& initial);

  /// `state` is the world after the step that produced `events`.
  std::vector<RewardBreakdown> on_step(const WorldState& state, const StepEvents& events);

 private:
  std::vector<DilemmaWindow> windows_;
};

}  // namespace hgam
