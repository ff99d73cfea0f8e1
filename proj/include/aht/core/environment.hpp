#pragma once

#include <memory>
#include <span>

#include "aht/core/rng.hpp"
#include "aht/core/types.hpp"

namespace aht {

struct StepOutcome {
  Real reward = 0.0;      // training reward (shaped if the env shapes)
  Real raw_reward = 0.0;  // task reward
  bool done = false;
};

// A two-player, fully observable environment instance holding its own state.
// Cloning an instance is how states are snapshotted and restored.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual const EnvDescriptor& descriptor() const = 0;
  virtual void reset(Rng& rng) = 0;
  virtual StepOutcome step(int action0, int action1, Rng& rng) = 0;
  // Writes agent `agent`'s observation (obs_dim values).
  virtual void observe(int agent, std::span<Real> out) const = 0;
  virtual int time_step() const = 0;
  virtual bool terminal() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  Vector observation(int agent) const {
    Vector v(descriptor().obs_dim);
    observe(agent, std::span<Real>(v.data(), static_cast<std::size_t>(v.size())));
    return v;
  }
};

using EnvSnapshot = std::shared_ptr<const Environment>;

// Acting interface shared by networks, scripted agents and mixtures.
// Per episode: begin_episode, then per step action_probs followed by
// observe_action with the action actually executed in this agent slot.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual void begin_episode(const Environment& env, int agent) {
    (void)env;
    (void)agent;
  }
  // `rng` is a policy-private stream (scripted randomness, mixture coins);
  // action sampling from `probs` happens in the caller.
  virtual void action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                            std::span<Real> probs) = 0;
  virtual void observe_action(int action) { (void)action; }
};

}  // namespace aht
