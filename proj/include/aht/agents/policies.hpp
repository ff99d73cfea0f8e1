#pragma once

#include <memory>

#include "aht/core/environment.hpp"
#include "aht/nn/param_set.hpp"

namespace aht::agents {

// Softmax over a feed-forward actor's logits.
class MlpPolicy : public Policy {
 public:
  explicit MlpPolicy(nn::ParamSet actor);

  const nn::ParamSet& params() const { return actor_; }
  void action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                    std::span<Real> probs) override;

 private:
  nn::ParamSet actor_;
};

// History-conditioned policy: carries the recurrent hidden state and the
// last executed action across steps; both reset at episode start.
class RecurrentPolicy : public Policy {
 public:
  explicit RecurrentPolicy(nn::ParamSet net);

  const nn::ParamSet& params() const { return net_; }
  const Vector& hidden() const { return hidden_; }
  void begin_episode(const Environment& env, int agent) override;
  void action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                    std::span<Real> probs) override;
  void observe_action(int action) override;

 private:
  nn::ParamSet net_;
  Vector hidden_;
  Vector pending_;
  int last_action_ = -1;
};

class UniformPolicy : public Policy {
 public:
  void action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                    std::span<Real> probs) override;
};

class FixedActionPolicy : public Policy {
 public:
  explicit FixedActionPolicy(int action) : action_(action) {}
  void action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                    std::span<Real> probs) override;

 private:
  int action_;
};

// Per-step coin between two policies: `first` acts with probability p_first.
// Both members see every step so recurrent members keep their history.
class MixturePolicy : public Policy {
 public:
  MixturePolicy(Policy& first, Policy& second, double p_first = 0.5);

  void begin_episode(const Environment& env, int agent) override;
  void action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                    std::span<Real> probs) override;
  void observe_action(int action) override;
  bool last_was_first() const { return last_first_; }

 private:
  Policy& first_;
  Policy& second_;
  double p_first_;
  bool last_first_ = true;
  std::vector<Real> scratch_;
};

// Acting policy for a parameter set of either kind.
std::unique_ptr<Policy> make_policy(const nn::ParamSet& params);

}  // namespace aht::agents
