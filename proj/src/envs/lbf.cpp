#include "aht/envs/lbf.hpp"

#include <algorithm>
#include <stdexcept>

namespace aht::envs {

void LbfConfig::validate() const {
  if (grid < 3) throw std::invalid_argument("lbf: grid must be >= 3");
  if (num_foods < 1) throw std::invalid_argument("lbf: num_foods must be >= 1");
  if (player_level < 1 || food_level < 1) throw std::invalid_argument("lbf: levels must be positive");
  if (food_level > 2 * player_level) throw std::invalid_argument("lbf: food level above both players combined");
  if (horizon < 1) throw std::invalid_argument("lbf: horizon must be >= 1");
  const int interior = (grid - 2) * (grid - 2);
  if (num_foods * 4 > interior) throw std::invalid_argument("lbf: too many foods for the grid");
}

int LbfState::remaining() const {
  return static_cast<int>(std::count(collected.begin(), collected.end(), false));
}

bool LbfState::food_at(Cell c) const {
  for (std::size_t i = 0; i < foods.size(); ++i)
    if (!collected[i] && foods[i] == c) return true;
  return false;
}

LbfState lbf_reset(const LbfConfig& cfg, Rng& rng) {
  LbfState s;
  s.levels = {cfg.player_level, cfg.player_level};
  auto near_food = [&](Cell c) {
    for (const Cell& f : s.foods)
      if (std::abs(f.row - c.row) <= 1 && std::abs(f.col - c.col) <= 1) return true;
    return false;
  };
  while (static_cast<int>(s.foods.size()) < cfg.num_foods) {
    std::vector<Cell> options;
    for (int r = 1; r + 1 < cfg.grid; ++r)
      for (int c = 1; c + 1 < cfg.grid; ++c)
        if (!near_food({r, c})) options.push_back({r, c});
    if (options.empty()) {
      // dense packing can strand the last food; start over
      s.foods.clear();
      continue;
    }
    s.foods.push_back(options[rng.uniform_index(options.size())]);
  }
  s.food_levels.assign(s.foods.size(), cfg.food_level);
  s.collected.assign(s.foods.size(), false);
  std::vector<Cell> free;
  for (int r = 0; r < cfg.grid; ++r)
    for (int c = 0; c < cfg.grid; ++c)
      if (!s.food_at({r, c})) free.push_back({r, c});
  for (int p = 0; p < 2; ++p) {
    const std::size_t k = rng.uniform_index(free.size());
    s.players[static_cast<std::size_t>(p)] = free[k];
    free.erase(free.begin() + static_cast<std::ptrdiff_t>(k));
  }
  return s;
}

LbfStepResult lbf_step(const LbfConfig& cfg, LbfState& s, const std::array<int, 2>& actions) {
  LbfStepResult out;
  if (s.done) return {0.0, true, false, false};
  ++s.t;
  out.reward = -cfg.step_penalty;
  for (int a : actions)
    if (a < 0 || a >= kLbfNumActions) out.invalid_action = true;
  if (out.invalid_action) {
    s.done = out.done = true;
    return out;
  }

  auto inside = [&](Cell c) { return c.row >= 0 && c.col >= 0 && c.row < cfg.grid && c.col < cfg.grid; };
  std::array<Cell, 2> target = s.players;
  for (int p = 0; p < 2; ++p) {
    const int a = actions[static_cast<std::size_t>(p)];
    if (a > kLbfRight) continue;
    const Cell n = offset(s.players[static_cast<std::size_t>(p)], a);
    if (inside(n) && !s.food_at(n)) target[static_cast<std::size_t>(p)] = n;
  }
  const bool moved0 = target[0] != s.players[0];
  const bool moved1 = target[1] != s.players[1];
  if ((moved0 && moved1 && target[0] == target[1]) ||
      (moved0 && moved1 && target[0] == s.players[1] && target[1] == s.players[0])) {
    out.collision = true;
    s.done = out.done = true;
    return out;
  }
  // a move into a player who stays put is blocked
  if (moved0 && !moved1 && target[0] == s.players[1]) target[0] = s.players[0];
  if (moved1 && !moved0 && target[1] == s.players[0]) target[1] = s.players[1];
  s.players = target;

  const double per_food = cfg.total_reward / static_cast<double>(s.foods.size());
  for (std::size_t i = 0; i < s.foods.size(); ++i) {
    if (s.collected[i]) continue;
    int level = 0;
    for (int p = 0; p < 2; ++p)
      if (actions[static_cast<std::size_t>(p)] == kLbfLoad && adjacent(s.players[static_cast<std::size_t>(p)], s.foods[i]))
        level += s.levels[static_cast<std::size_t>(p)];
    if (level > 0 && level >= s.food_levels[i]) {
      s.collected[i] = true;
      out.reward += per_food;
    }
  }
  if (s.remaining() == 0 || s.t >= cfg.horizon) s.done = true;
  out.done = s.done;
  return out;
}

int lbf_obs_dim(const LbfConfig& cfg) { return 4 + 3 * cfg.num_foods + 1; }

void lbf_observe(const LbfConfig& cfg, const LbfState& s, int agent, std::span<Real> out) {
  if (static_cast<int>(out.size()) != lbf_obs_dim(cfg)) throw std::invalid_argument("lbf_observe: wrong buffer size");
  const double scale = 1.0 / static_cast<double>(cfg.grid - 1);
  const Cell self = s.players[static_cast<std::size_t>(agent)];
  const Cell other = s.players[static_cast<std::size_t>(1 - agent)];
  std::size_t k = 0;
  out[k++] = self.row * scale;
  out[k++] = self.col * scale;
  out[k++] = (other.row - self.row) * scale;
  out[k++] = (other.col - self.col) * scale;
  for (std::size_t i = 0; i < s.foods.size(); ++i) {
    const bool present = !s.collected[i];
    out[k++] = present ? (s.foods[i].row - self.row) * scale : 0.0;
    out[k++] = present ? (s.foods[i].col - self.col) * scale : 0.0;
    out[k++] = present ? 1.0 : 0.0;
  }
  out[k++] = static_cast<double>(s.t) / static_cast<double>(cfg.horizon);
}

LbfEnv::LbfEnv(LbfConfig cfg) : cfg_(cfg) {
  cfg_.validate();
  desc_ = {"lbf", 2, lbf_obs_dim(cfg_), kLbfNumActions, cfg_.horizon, cfg_.gamma};
  desc_.validate();
  Rng rng(0);
  state_ = lbf_reset(cfg_, rng);
}

void LbfEnv::reset(Rng& rng) { state_ = lbf_reset(cfg_, rng); }

StepOutcome LbfEnv::step(int action0, int action1, Rng& rng) {
  (void)rng;
  const auto r = lbf_step(cfg_, state_, {action0, action1});
  return {r.reward, r.reward, r.done};
}

void LbfEnv::observe(int agent, std::span<Real> out) const { lbf_observe(cfg_, state_, agent, out); }

}  // namespace aht::envs
