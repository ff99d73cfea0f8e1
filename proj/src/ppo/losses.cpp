#include "aht/ppo/losses.hpp"

#include <algorithm>
#include <cmath>

namespace aht::ppo {

AdvantageBatch AdvantageBatch::subset(std::span<const Eigen::Index> idx) const {
  AdvantageBatch out;
  const auto n = static_cast<Eigen::Index>(idx.size());
  out.obs.resize(obs.rows(), n);
  out.actions.resize(idx.size());
  out.advantages.resize(n);
  out.value_targets.resize(n);
  out.old_log_probs.resize(n);
  out.old_values.resize(n);
  if (critic_obs.size()) out.critic_obs.resize(critic_obs.rows(), n);
  for (Eigen::Index k = 0; k < n; ++k) {
    const Eigen::Index j = idx[static_cast<std::size_t>(k)];
    out.obs.col(k) = obs.col(j);
    out.actions[static_cast<std::size_t>(k)] = actions[static_cast<std::size_t>(j)];
    out.advantages[k] = advantages[j];
    out.value_targets[k] = value_targets[j];
    out.old_log_probs[k] = old_log_probs[j];
    out.old_values[k] = old_values[j];
    if (critic_obs.size()) out.critic_obs.col(k) = critic_obs.col(j);
  }
  return out;
}

nn::OutputLoss ppo_clip_logits_loss(const Matrix& logits, std::span<const int> actions, const Vector& advantages,
                                    const Vector& old_log_probs, double clip_eps, double ent_coef, double weight,
                                    const std::string& name, PolicyLossStats* stats) {
  const Eigen::Index n = logits.cols();
  if (static_cast<Eigen::Index>(actions.size()) != n || advantages.size() != n || old_log_probs.size() != n)
    throw std::invalid_argument("ppo_clip_logits_loss: batch size mismatch");
  nn::OutputLoss out;
  out.d_outputs = Matrix::Zero(logits.rows(), n);
  if (n == 0) {
    out.terms = {{name + ".clip", 0.0}, {name + ".entropy", 0.0}};
    return out;
  }
  const Matrix logp = nn::log_softmax(logits);
  const double inv_n = 1.0 / static_cast<double>(n);
  double clip_sum = 0.0, negent_sum = 0.0, clipped = 0.0, kl = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) {
    const int a = actions[static_cast<std::size_t>(j)];
    const double lp = logp(a, j);
    const double log_ratio = lp - old_log_probs[j];
    const double ratio = std::exp(log_ratio);
    if (!std::isfinite(ratio)) throw nn::NonFiniteLoss(name + ".ratio");
    const double adv = advantages[j];
    const double surr1 = ratio * adv;
    const double surr2 = std::clamp(ratio, 1.0 - clip_eps, 1.0 + clip_eps) * adv;
    clip_sum += -std::min(surr1, surr2);
    if (std::abs(ratio - 1.0) > clip_eps) clipped += 1.0;
    kl += (ratio - 1.0) - log_ratio;
    const double d_lp = (surr1 <= surr2) ? -ratio * adv : 0.0;

    const auto p = logp.col(j).array().exp();
    const double negent = (p * logp.col(j).array()).sum();
    negent_sum += negent;
    // d(lp)/d(logits) = onehot(a) - p ; d(sum p log p)/d(logits_k) = p_k (log p_k - sum p log p)
    auto col = out.d_outputs.col(j);
    col = (-d_lp * p).matrix();
    col[a] += d_lp;
    col.array() += ent_coef * p * (logp.col(j).array() - negent);
    col *= weight * inv_n;
  }
  out.terms = {{name + ".clip", weight * clip_sum * inv_n}, {name + ".entropy", weight * ent_coef * negent_sum * inv_n}};
  if (stats) {
    stats->clip_loss = clip_sum * inv_n;
    stats->entropy = -negent_sum * inv_n;
    stats->clip_frac = clipped * inv_n;
    stats->approx_kl = kl * inv_n;
  }
  return out;
}

nn::OutputLoss value_output_loss(const Matrix& values, const Vector& targets, double weight, const std::string& name) {
  const Eigen::Index n = values.cols();
  if (values.rows() != 1 || targets.size() != n) throw std::invalid_argument("value_output_loss: shape mismatch");
  nn::OutputLoss out;
  if (n == 0) {
    out.d_outputs = Matrix::Zero(1, 0);
    out.terms = {{name, 0.0}};
    return out;
  }
  const Vector err = values.row(0).transpose() - targets;
  out.terms = {{name, weight * err.squaredNorm() / static_cast<double>(n)}};
  out.d_outputs = (2.0 * weight / static_cast<double>(n)) * err.transpose();
  return out;
}

double ppo_clip_policy_loss(const nn::ParamSet& params, const nn::ParamSet& params_old, const AdvantageBatch& batch,
                            double clip_eps, double entropy_coef, PolicyLossStats* stats) {
  if (params.shape() != params_old.shape()) throw std::invalid_argument("ppo_clip_policy_loss: shape mismatch");
  const Matrix logits = nn::mlp_forward(params, batch.obs);
  Vector adv = batch.advantages;
  normalize(adv);
  const auto l = ppo_clip_logits_loss(logits, batch.actions, adv, batch.old_log_probs, clip_eps,
                                      entropy_coef, 1.0, "policy", stats);
  nn::check_finite(l.terms);
  return l.total();
}

double value_loss(const nn::ParamSet& critic, const nn::ParamSet& critic_old, const AdvantageBatch& batch) {
  if (critic.shape() != critic_old.shape()) throw std::invalid_argument("value_loss: shape mismatch");
  const Matrix v = nn::mlp_forward(critic, batch.critic_input());
  return value_output_loss(v, batch.value_targets, 1.0, "value").total();
}

void normalize(Vector& v) {
  if (v.size() < 2) return;
  const double mean = v.mean();
  const double var = (v.array() - mean).square().mean();
  v = ((v.array() - mean) / (std::sqrt(var) + 1e-8)).matrix();
}

Vector action_log_probs(const nn::ParamSet& actor, const Matrix& obs, std::span<const int> actions) {
  const Matrix logp = nn::log_softmax(nn::mlp_forward(actor, obs));
  Vector out(obs.cols());
  for (Eigen::Index j = 0; j < obs.cols(); ++j) out[j] = logp(actions[static_cast<std::size_t>(j)], j);
  return out;
}

}  // namespace aht::ppo
