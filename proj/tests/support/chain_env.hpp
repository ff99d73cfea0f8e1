#pragma once

#include <stdexcept>

#include "aht/core/environment.hpp"
#include "oracles.hpp"

namespace testenv {

// Two-player version of oracle::Chain: the state advances only when both
// players pick action 1. Observation is the one-hot state for both players.
class ChainEnv : public aht::Environment {
 public:
  explicit ChainEnv(oracle::Chain c = {}, double gamma = 0.99) : chain_(c) {
    desc_.name = "chain";
    desc_.obs_dim = c.n;
    desc_.num_actions = 2;
    desc_.horizon = 50;
    desc_.gamma = gamma;
  }

  const aht::EnvDescriptor& descriptor() const override { return desc_; }
  void reset(aht::Rng&) override {
    s_ = 0;
    t_ = 0;
    done_ = false;
  }
  aht::StepOutcome step(int a0, int a1, aht::Rng&) override {
    if (done_) throw std::logic_error("chain: step after done");
    aht::StepOutcome o;
    if (s_ == chain_.n - 1) {
      o.reward = chain_.goal_reward;
      done_ = true;
    } else {
      o.reward = chain_.step_reward;
      if (a0 == 1 && a1 == 1) ++s_;
    }
    ++t_;
    if (t_ >= desc_.horizon) done_ = true;
    o.raw_reward = o.reward;
    o.done = done_;
    return o;
  }
  void observe(int, std::span<aht::Real> out) const override {
    for (auto& x : out) x = 0.0;
    out[static_cast<std::size_t>(s_)] = 1.0;
  }
  int time_step() const override { return t_; }
  bool terminal() const override { return done_; }
  std::unique_ptr<aht::Environment> clone() const override { return std::make_unique<ChainEnv>(*this); }

  int state() const { return s_; }

 private:
  oracle::Chain chain_;
  aht::EnvDescriptor desc_;
  int s_ = 0;
  int t_ = 0;
  bool done_ = false;
};

}  // namespace testenv
