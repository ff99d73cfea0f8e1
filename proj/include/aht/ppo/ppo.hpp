#pragma once

#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "aht/core/rng.hpp"
#include "aht/core/types.hpp"
#include "aht/nn/adam.hpp"
#include "aht/nn/param_set.hpp"
#include "aht/ppo/losses.hpp"

namespace aht::ppo {

struct PpoConfig {
  double clip_eps = 0.2;
  int epochs = 4;
  int minibatches = 4;
  double ent_coef = 0.01;
  double lr = 3e-4;
  bool anneal_lr = false;
  double gamma = 0.99;
  double lambda = 0.95;
  int num_envs = 16;  // episodes collected per update
  long total_timesteps = 300000;
  double max_grad_norm = 0.5;
  bool normalize_advantages = true;
  double vf_coef = 0.5;  // only used by the shared-trunk recurrent learner

  void validate() const;
  // Learning rate after `steps_done` environment steps (linear to zero when annealing).
  double lr_at(long steps_done) const;
};

// Transitions seen from one agent slot, flattened in episode order.
struct SlotView {
  Matrix obs;  // obs_dim x N
  std::vector<int> actions;
  std::vector<Real> rewards;
  std::vector<std::uint8_t> dones;
  std::vector<std::size_t> episode_begin;  // start offset of each episode

  std::size_t size() const { return actions.size(); }
};

SlotView slot_view(const TrajectoryBatch& batch, int slot);

// Observations with a one-hot partner id appended (id-conditioned critics).
Matrix append_one_hot(const Matrix& obs, int index, int count);

// Value of the state following each transition under `critic`: the next
// transition's observation within the episode, 0 after a done.
Vector next_state_values(const nn::ParamSet& critic, const Matrix& critic_obs, std::span<const std::uint8_t> dones);

// GAE advantages and targets from `critic` plus old log-probs from `actor`.
AdvantageBatch gae_batch(const nn::ParamSet& actor, const nn::ParamSet& critic, const SlotView& view, double gamma,
                         double lambda, const Matrix* critic_obs = nullptr);

struct PolicyTerm {
  const AdvantageBatch* batch = nullptr;
  double weight = 1.0;
  std::string name = "policy";
  bool normalize = true;  // subject to PpoConfig::normalize_advantages
};

struct ValueTerm {
  const AdvantageBatch* batch = nullptr;
  double weight = 1.0;
  std::string name = "value";
};

struct TrainStats {
  double loss = 0.0;
  PolicyLossStats policy;  // first term's statistics, averaged over steps
  int steps = 0;
};

// Epochs x minibatches of gradient steps on a sum of PPO-clip terms. Every
// term is shuffled independently and cut into the same number of chunks, so
// one step sees chunk k of every term.
TrainStats train_actor(nn::ParamSet& actor, nn::AdamState& opt, std::span<const PolicyTerm> terms,
                       const PpoConfig& cfg, double lr, Rng& rng);
TrainStats train_critic(nn::ParamSet& critic, nn::AdamState& opt, std::span<const ValueTerm> terms,
                        const PpoConfig& cfg, double lr, Rng& rng);

struct ActorCritic {
  nn::ParamSet actor;
  nn::ParamSet critic;
  nn::AdamState actor_opt;
  nn::AdamState critic_opt;

  // 2 x hidden tanh MLPs; the critic takes `critic_extra` additional inputs.
  static ActorCritic create(int obs_dim, int num_actions, int hidden, Rng& rng, int critic_extra = 0);
  bool operator==(const ActorCritic&) const = default;
};

struct PpoDiagnostics {
  long update_idx = 0;
  double mean_return = 0.0;
  double policy_loss = 0.0;
  double value_loss = 0.0;
  double entropy = 0.0;
  double clip_frac = 0.0;
  double approx_kl = 0.0;

  nlohmann::json to_json() const;
};

// One PPO update of the learner in `slot` on a finished batch.
PpoDiagnostics ppo_update(ActorCritic& learner, const TrajectoryBatch& batch, int slot, const PpoConfig& cfg,
                          double lr, Rng& rng);

// Shared-trunk recurrent actor-critic (the ego).
struct RecurrentLearner {
  nn::ParamSet net;
  nn::AdamState opt;

  static RecurrentLearner create(int obs_dim, int num_actions, int embed, int hidden, int head, Rng& rng);
  bool operator==(const RecurrentLearner&) const = default;
};

// Full-episode BPTT PPO update; minibatches are groups of whole episodes.
PpoDiagnostics recurrent_ppo_update(RecurrentLearner& learner, const TrajectoryBatch& batch, int slot,
                                    const PpoConfig& cfg, double lr, Rng& rng);

}  // namespace aht::ppo
