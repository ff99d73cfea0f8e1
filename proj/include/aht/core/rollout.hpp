#pragma once

#include <vector>

#include "aht/core/environment.hpp"

namespace aht {

struct StartSpec {
  StartDistribution kind = StartDistribution::initial;
  // Restart states for kind == xp_states; episode e starts from states[e % size].
  std::vector<EnvSnapshot> states;

  static StartSpec initial() { return {}; }
  static StartSpec from_states(std::vector<EnvSnapshot> s) {
    return {StartDistribution::xp_states, std::move(s)};
  }
};

struct RolloutOptions {
  Mode mode = Mode::SP;
  bool capture_states = false;  // record a snapshot of the state before every transition
};

struct RolloutResult {
  TrajectoryBatch batch;
  // captured[e][k] is the state in which transition k of episode e was taken.
  std::vector<std::vector<EnvSnapshot>> captured;
};

// Plays `num_episodes` episodes of (policy_a in slot 0, policy_b in slot 1).
// Every episode draws its randomness from rng.derive("episode", e), so the
// result is a pure function of the inputs.
RolloutResult rollout(const Environment& env, Policy& policy_a, Policy& policy_b, const StartSpec& start,
                      int num_episodes, const Rng& rng, const RolloutOptions& options = {});

// Random-switch variant: plays `prefix_a` in slot 0 for a uniformly drawn
// number of steps, then switches to `policy_a`; only post-switch transitions
// are recorded.
RolloutResult rollout_with_switch(const Environment& env, Policy& prefix_a, Policy& policy_a, Policy& policy_b,
                                  int num_episodes, const Rng& rng, Mode mode);

}  // namespace aht
