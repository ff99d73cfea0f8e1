#pragma once

#include <memory>
#include <string>
#include <vector>

#include "aht/core/environment.hpp"
#include "aht/envs/lbf.hpp"
#include "aht/envs/overcooked.hpp"

namespace aht::envs {

enum class HeuristicKind {
  seq_col,
  seq_rcol,
  seq_lexi,
  seq_rlexi,
  seq_nearest,
  seq_farthest,
  onion_cook,
  plate_cook,
  independent_cook,
};

struct HeuristicAgent {
  HeuristicKind kind = HeuristicKind::seq_col;
  double drop_prob = 0.0;  // cooks only

  bool is_lbf() const { return kind <= HeuristicKind::seq_farthest; }
  std::string name() const;
};

const char* to_string(HeuristicKind k);
HeuristicKind parse_heuristic_kind(const std::string& s);
// Inverse of HeuristicAgent::name (e.g. "onion_cook_0.1").
HeuristicAgent parse_heuristic(const std::string& name);

std::vector<HeuristicAgent> lbf_heuristics();
std::vector<HeuristicAgent> overcooked_heuristics();  // 3 cook roles x drop {0, 0.1, 0.4}

// Food visiting order for a sequencing agent; `origin` is the agent's
// position at the start of the episode.
std::vector<std::size_t> lbf_food_order(HeuristicKind kind, const std::vector<Cell>& foods, Cell origin);

// One planning step toward `target`: load when adjacent, otherwise the first
// move of a shortest path that keeps out of reach of the other player.
// Unreachable targets yield noop.
int lbf_plan_action(const LbfConfig& cfg, const LbfState& s, int agent, std::size_t target);

class HeuristicPolicy : public Policy {
 public:
  explicit HeuristicPolicy(HeuristicAgent agent) : agent_(agent) {}

  const HeuristicAgent& agent() const { return agent_; }
  void begin_episode(const Environment& env, int agent) override;
  void action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                    std::span<Real> probs) override;

  // The deterministic or sampled action for the current state.
  int act(const Environment& env, int agent, Rng& rng);

 private:
  int lbf_act(const LbfEnv& env, int agent);
  int cook_act(const OvercookedEnv& env, int agent, Rng& rng);

  HeuristicAgent agent_;
  std::vector<std::size_t> order_;
  Item last_held_ = Item::none;
  bool dropping_ = false;
};

// Action a heuristic agent takes in the env's current state.
int heuristic_action(HeuristicPolicy& agent, const Environment& env, int slot, Rng& rng);

}  // namespace aht::envs
