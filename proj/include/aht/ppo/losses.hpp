#pragma once

#include <string>
#include <vector>

#include "aht/core/types.hpp"
#include "aht/nn/backprop.hpp"

namespace aht::ppo {

// Per-transition PPO inputs for one learner.
struct AdvantageBatch {
  Matrix obs;                 // obs_dim x N
  std::vector<int> actions;   // N
  Vector advantages;          // N (policy-gradient target; may be a regret target)
  Vector value_targets;       // N
  Vector old_log_probs;       // N
  Vector old_values;          // N
  Matrix critic_obs;          // critic input when it differs from obs (else empty)

  Eigen::Index size() const { return obs.cols(); }
  const Matrix& critic_input() const { return critic_obs.size() ? critic_obs : obs; }
  AdvantageBatch subset(std::span<const Eigen::Index> idx) const;
};

struct PolicyLossStats {
  double clip_loss = 0.0;  // mean of -min(rA, clip(r)A)
  double entropy = 0.0;    // mean policy entropy
  double clip_frac = 0.0;
  double approx_kl = 0.0;  // mean (r - 1) - log r
};

// PPO-clip plus entropy loss on precomputed logits (A x N):
//   weight * mean_j[ -min(r_j A_j, clip(r_j, 1-eps, 1+eps) A_j) + ent_coef * sum_a pi log pi ]
// with gradient with respect to the logits. Throws NonFiniteLoss when a
// probability ratio is not finite.
nn::OutputLoss ppo_clip_logits_loss(const Matrix& logits, std::span<const int> actions, const Vector& advantages,
                                    const Vector& old_log_probs, double clip_eps, double ent_coef, double weight,
                                    const std::string& name, PolicyLossStats* stats = nullptr);

// Squared error weight * mean_j (V_j - target_j)^2 on a 1 x N value row.
nn::OutputLoss value_output_loss(const Matrix& values, const Vector& targets, double weight, const std::string& name);

// Scalar PPO-clip policy loss of `params` on `batch`, with the batch
// advantages normalized first. old_log_probs must come from params_old on the
// same transitions; params_old itself is not re-read.
double ppo_clip_policy_loss(const nn::ParamSet& params, const nn::ParamSet& params_old, const AdvantageBatch& batch,
                            double clip_eps, double entropy_coef, PolicyLossStats* stats = nullptr);

// Mean squared error of the critic against the batch's value targets.
double value_loss(const nn::ParamSet& critic, const nn::ParamSet& critic_old, const AdvantageBatch& batch);

// Normalizes to zero mean and unit standard deviation (no-op for < 2 samples).
void normalize(Vector& v);

// Log-probabilities of chosen actions under a feed-forward actor.
Vector action_log_probs(const nn::ParamSet& actor, const Matrix& obs, std::span<const int> actions);

}  // namespace aht::ppo
