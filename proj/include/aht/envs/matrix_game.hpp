#pragma once

#include <vector>

#include "aht/core/environment.hpp"

namespace aht::envs {

// One-shot two-player game: both agents see a constant observation, act once,
// and share payoff[a0][a1].
class MatrixGameEnv : public Environment {
 public:
  MatrixGameEnv(std::vector<std::vector<double>> payoff, std::string name = "matrix_game");

  // 1 on matching conventions, 0 otherwise.
  static MatrixGameEnv coordination(int n = 2);
  // Reward depends on the first agent's arm only.
  static MatrixGameEnv bandit(std::vector<double> arm_rewards);

  const EnvDescriptor& descriptor() const override { return desc_; }
  void reset(Rng& rng) override;
  StepOutcome step(int action0, int action1, Rng& rng) override;
  void observe(int agent, std::span<Real> out) const override;
  int time_step() const override { return t_; }
  bool terminal() const override { return t_ >= 1; }
  std::unique_ptr<Environment> clone() const override { return std::make_unique<MatrixGameEnv>(*this); }

  double payoff(int a0, int a1) const;

 private:
  std::vector<std::vector<double>> payoff_;
  EnvDescriptor desc_;
  int t_ = 0;
};

}  // namespace aht::envs
