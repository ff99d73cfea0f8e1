#include "aht/envs/matrix_game.hpp"

#include <stdexcept>

namespace aht::envs {

MatrixGameEnv::MatrixGameEnv(std::vector<std::vector<double>> payoff, std::string name) : payoff_(std::move(payoff)) {
  if (payoff_.empty() || payoff_.front().empty()) throw std::invalid_argument("matrix game: empty payoff");
  for (const auto& row : payoff_)
    if (row.size() != payoff_.size()) throw std::invalid_argument("matrix game: payoff must be square");
  desc_ = {std::move(name), 2, 1, static_cast<int>(payoff_.size()), 1, 0.99};
  desc_.validate();
}

MatrixGameEnv MatrixGameEnv::coordination(int n) {
  std::vector<std::vector<double>> p(static_cast<std::size_t>(n), std::vector<double>(static_cast<std::size_t>(n)));
  for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)][static_cast<std::size_t>(i)] = 1.0;
  return MatrixGameEnv(std::move(p), "coordination");
}

MatrixGameEnv MatrixGameEnv::bandit(std::vector<double> arm_rewards) {
  std::vector<std::vector<double>> p;
  for (double r : arm_rewards) p.emplace_back(arm_rewards.size(), r);
  return MatrixGameEnv(std::move(p), "bandit");
}

void MatrixGameEnv::reset(Rng& rng) {
  (void)rng;
  t_ = 0;
}

double MatrixGameEnv::payoff(int a0, int a1) const {
  const int n = static_cast<int>(payoff_.size());
  if (a0 < 0 || a1 < 0 || a0 >= n || a1 >= n) return 0.0;
  return payoff_[static_cast<std::size_t>(a0)][static_cast<std::size_t>(a1)];
}

StepOutcome MatrixGameEnv::step(int action0, int action1, Rng& rng) {
  (void)rng;
  if (t_ >= 1) return {0.0, 0.0, true};
  t_ = 1;
  const double r = payoff(action0, action1);
  return {r, r, true};
}

void MatrixGameEnv::observe(int agent, std::span<Real> out) const {
  (void)agent;
  out[0] = 1.0;
}

}  // namespace aht::envs
