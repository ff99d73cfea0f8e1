#pragma once

#include <array>
#include <vector>

#include "aht/core/environment.hpp"
#include "aht/envs/grid.hpp"

namespace aht::envs {

enum LbfAction : int { kLbfUp = 0, kLbfDown, kLbfLeft, kLbfRight, kLbfNoop, kLbfLoad, kLbfNumActions };

struct LbfConfig {
  int grid = 7;
  int num_foods = 3;
  int player_level = 1;
  int food_level = 2;  // sum of both player levels
  int horizon = 100;
  double total_reward = 0.5;
  double step_penalty = 0.0;
  double gamma = 0.99;

  void validate() const;
};

struct LbfState {
  std::array<Cell, 2> players{};
  std::array<int, 2> levels{1, 1};
  std::vector<Cell> foods;
  std::vector<int> food_levels;
  std::vector<bool> collected;
  int t = 0;
  bool done = false;

  int remaining() const;
  bool food_at(Cell c) const;  // uncollected food
  bool operator==(const LbfState&) const = default;
};

struct LbfStepResult {
  double reward = 0.0;
  bool done = false;
  bool collision = false;
  bool invalid_action = false;
};

// Foods go on interior cells with no other food in their 8-neighbourhood;
// players go on distinct free cells.
LbfState lbf_reset(const LbfConfig& cfg, Rng& rng);

// Simultaneous move and load. Moves off the grid, onto food or onto a player
// who stays put leave the mover in place. Two moves into one cell, or a swap,
// end the episode as a collision; so does an out-of-range action index. A
// food is collected when the levels of the adjacent players issuing load sum
// to at least its level.
LbfStepResult lbf_step(const LbfConfig& cfg, LbfState& state, const std::array<int, 2>& actions);

int lbf_obs_dim(const LbfConfig& cfg);
// Egocentric features: own position, offset to the other player, offset and
// presence flag per food, elapsed fraction of the horizon.
void lbf_observe(const LbfConfig& cfg, const LbfState& state, int agent, std::span<Real> out);

class LbfEnv : public Environment {
 public:
  explicit LbfEnv(LbfConfig cfg = {});

  const EnvDescriptor& descriptor() const override { return desc_; }
  void reset(Rng& rng) override;
  StepOutcome step(int action0, int action1, Rng& rng) override;
  void observe(int agent, std::span<Real> out) const override;
  int time_step() const override { return state_.t; }
  bool terminal() const override { return state_.done; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<LbfEnv>(*this); }

  const LbfConfig& config() const { return cfg_; }
  const LbfState& state() const { return state_; }
  void set_state(const LbfState& s) { state_ = s; }

 private:
  LbfConfig cfg_;
  EnvDescriptor desc_;
  LbfState state_;
};

}  // namespace aht::envs
