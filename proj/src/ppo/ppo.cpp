#include "aht/ppo/ppo.hpp"

#include <algorithm>
#include <numeric>

#include "aht/nn/backprop.hpp"
#include "aht/nn/init.hpp"
#include "aht/nn/recurrent.hpp"
#include "aht/ppo/gae.hpp"

namespace aht::ppo {

namespace {

std::vector<Eigen::Index> shuffled(Eigen::Index n, Rng& rng) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), Eigen::Index{0});
  for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.uniform_index(i)]);
  return idx;
}

std::span<const Eigen::Index> chunk(const std::vector<Eigen::Index>& perm, int k, int m) {
  const std::size_t n = perm.size();
  const std::size_t lo = n * static_cast<std::size_t>(k) / static_cast<std::size_t>(m);
  const std::size_t hi = n * static_cast<std::size_t>(k + 1) / static_cast<std::size_t>(m);
  return {perm.data() + lo, hi - lo};
}

}  // namespace

void PpoConfig::validate() const {
  if (!(clip_eps > 0.0 && clip_eps < 1.0)) throw std::invalid_argument("ppo: clip_eps must lie in (0,1)");
  if (epochs < 1) throw std::invalid_argument("ppo: epochs must be >= 1");
  if (minibatches < 1) throw std::invalid_argument("ppo: minibatches must be >= 1");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("ppo: gamma must lie in (0,1]");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("ppo: lambda must lie in (0,1]");
  if (num_envs < 1) throw std::invalid_argument("ppo: num_envs must be >= 1");
  if (!(lr > 0.0)) throw std::invalid_argument("ppo: lr must be positive");
  if (total_timesteps < 0) throw std::invalid_argument("ppo: total_timesteps must be >= 0");
}

double PpoConfig::lr_at(long steps_done) const {
  if (!anneal_lr || total_timesteps <= 0) return lr;
  const double frac = 1.0 - static_cast<double>(steps_done) / static_cast<double>(total_timesteps);
  return lr * std::max(frac, 0.0);
}

SlotView slot_view(const TrajectoryBatch& batch, int slot) {
  SlotView v;
  const std::size_t n = batch.num_transitions();
  Eigen::Index dim = 0;
  for (const auto& ep : batch.episodes)
    if (!ep.empty()) {
      dim = ep.front().obs_self.size();
      break;
    }
  v.obs.resize(dim, static_cast<Eigen::Index>(n));
  v.actions.reserve(n);
  v.rewards.reserve(n);
  v.dones.reserve(n);
  Eigen::Index col = 0;
  for (const auto& ep : batch.episodes) {
    v.episode_begin.push_back(static_cast<std::size_t>(col));
    for (const auto& tr : ep) {
      v.obs.col(col++) = slot == 0 ? tr.obs_self : tr.obs_other;
      v.actions.push_back(slot == 0 ? tr.action_self : tr.action_other);
      v.rewards.push_back(tr.reward);
      v.dones.push_back(tr.done ? 1 : 0);
    }
  }
  return v;
}

Matrix append_one_hot(const Matrix& obs, int index, int count) {
  Matrix out = Matrix::Zero(obs.rows() + count, obs.cols());
  out.topRows(obs.rows()) = obs;
  out.row(obs.rows() + index).setOnes();
  return out;
}

Vector next_state_values(const nn::ParamSet& critic, const Matrix& critic_obs, std::span<const std::uint8_t> dones) {
  const Eigen::Index n = critic_obs.cols();
  Vector out = Vector::Zero(n);
  if (n == 0) return out;
  const Matrix v = nn::mlp_forward(critic, critic_obs);
  for (Eigen::Index k = 0; k + 1 < n; ++k)
    if (!dones[static_cast<std::size_t>(k)]) out[k] = v(0, k + 1);
  return out;
}

AdvantageBatch gae_batch(const nn::ParamSet& actor, const nn::ParamSet& critic, const SlotView& view, double gamma,
                         double lambda, const Matrix* critic_obs) {
  AdvantageBatch b;
  b.obs = view.obs;
  b.actions = view.actions;
  if (critic_obs) b.critic_obs = *critic_obs;
  const auto n = static_cast<Eigen::Index>(view.size());
  b.old_log_probs = n ? action_log_probs(actor, view.obs, view.actions) : Vector();
  b.old_values = n ? Vector(nn::mlp_forward(critic, b.critic_input()).row(0).transpose()) : Vector();
  b.advantages.resize(n);
  b.value_targets.resize(n);
  for (std::size_t e = 0; e < view.episode_begin.size(); ++e) {
    const std::size_t lo = view.episode_begin[e];
    const std::size_t hi = e + 1 < view.episode_begin.size() ? view.episode_begin[e + 1] : view.size();
    const std::size_t len = hi - lo;
    if (len == 0) continue;
    const auto r = gae(std::span(view.rewards).subspan(lo, len),
                       std::span<const Real>(b.old_values.data() + lo, len), 0.0,
                       std::span(view.dones).subspan(lo, len), gamma, lambda);
    b.advantages.segment(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(len)) = r.advantages;
    b.value_targets.segment(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(len)) = r.value_targets;
  }
  return b;
}

TrainStats train_actor(nn::ParamSet& actor, nn::AdamState& opt, std::span<const PolicyTerm> terms,
                       const PpoConfig& cfg, double lr, Rng& rng) {
  std::vector<AdvantageBatch> local;
  local.reserve(terms.size());
  for (const auto& t : terms) {
    if (!t.batch) throw std::invalid_argument("train_actor: missing batch for term " + t.name);
    local.push_back(*t.batch);
    if (cfg.normalize_advantages && t.normalize) normalize(local.back().advantages);
  }
  TrainStats out;
  const int m = std::max(cfg.minibatches, 1);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::vector<Eigen::Index>> perms;
    for (const auto& b : local) perms.push_back(shuffled(b.size(), rng));
    for (int k = 0; k < m; ++k) {
      Vector grad = Vector::Zero(actor.size());
      double loss = 0.0;
      bool any = false;
      PolicyLossStats st;
      for (std::size_t i = 0; i < local.size(); ++i) {
        const auto idx = chunk(perms[i], k, m);
        if (idx.empty()) continue;
        const AdvantageBatch sub = local[i].subset(idx);
        const auto& term = terms[i];
        const auto g = nn::backprop(actor, sub.obs, [&](const Matrix& logits) {
          return ppo_clip_logits_loss(logits, sub.actions, sub.advantages, sub.old_log_probs, cfg.clip_eps,
                                      cfg.ent_coef, term.weight, term.name, i == 0 ? &st : nullptr);
        });
        grad += g.grad;
        loss += g.loss;
        any = true;
      }
      if (!any) continue;
      nn::clip_grad_norm(grad, cfg.max_grad_norm);
      nn::adam_update(actor, grad, opt, lr);
      out.loss += loss;
      out.policy.clip_loss += st.clip_loss;
      out.policy.entropy += st.entropy;
      out.policy.clip_frac += st.clip_frac;
      out.policy.approx_kl += st.approx_kl;
      ++out.steps;
    }
  }
  if (out.steps) {
    const double s = 1.0 / out.steps;
    out.loss *= s;
    out.policy.clip_loss *= s;
    out.policy.entropy *= s;
    out.policy.clip_frac *= s;
    out.policy.approx_kl *= s;
  }
  return out;
}

TrainStats train_critic(nn::ParamSet& critic, nn::AdamState& opt, std::span<const ValueTerm> terms,
                        const PpoConfig& cfg, double lr, Rng& rng) {
  for (const auto& t : terms)
    if (!t.batch) throw std::invalid_argument("train_critic: missing batch for term " + t.name);
  TrainStats out;
  const int m = std::max(cfg.minibatches, 1);
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::vector<std::vector<Eigen::Index>> perms;
    for (const auto& t : terms) perms.push_back(shuffled(t.batch->size(), rng));
    for (int k = 0; k < m; ++k) {
      Vector grad = Vector::Zero(critic.size());
      double loss = 0.0;
      bool any = false;
      for (std::size_t i = 0; i < terms.size(); ++i) {
        const auto idx = chunk(perms[i], k, m);
        if (idx.empty()) continue;
        const AdvantageBatch sub = terms[i].batch->subset(idx);
        const auto g = nn::backprop(critic, sub.critic_input(), [&](const Matrix& values) {
          return value_output_loss(values, sub.value_targets, terms[i].weight, terms[i].name);
        });
        grad += g.grad;
        loss += g.loss;
        any = true;
      }
      if (!any) continue;
      nn::clip_grad_norm(grad, cfg.max_grad_norm);
      nn::adam_update(critic, grad, opt, lr);
      out.loss += loss;
      ++out.steps;
    }
  }
  if (out.steps) out.loss /= out.steps;
  return out;
}

ActorCritic ActorCritic::create(int obs_dim, int num_actions, int hidden, Rng& rng, int critic_extra) {
  Rng ra = rng.derive("actor");
  Rng rc = rng.derive("critic");
  ActorCritic ac;
  ac.actor = nn::init_params<double>(nn::ShapeDescriptor::mlp(obs_dim, {hidden, hidden}, num_actions), true, ra);
  ac.critic =
      nn::init_params<double>(nn::ShapeDescriptor::mlp(obs_dim + critic_extra, {hidden, hidden}, 1), false, rc);
  ac.actor_opt = nn::AdamState(ac.actor.size());
  ac.critic_opt = nn::AdamState(ac.critic.size());
  return ac;
}

nlohmann::json PpoDiagnostics::to_json() const {
  return {{"update_idx", update_idx}, {"mean_return", mean_return}, {"policy_loss", policy_loss},
          {"value_loss", value_loss}, {"entropy", entropy},         {"clip_frac", clip_frac},
          {"approx_kl", approx_kl}};
}

PpoDiagnostics ppo_update(ActorCritic& learner, const TrajectoryBatch& batch, int slot, const PpoConfig& cfg,
                          double lr, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("ppo_update: empty batch");
  const SlotView view = slot_view(batch, slot);
  const AdvantageBatch adv = gae_batch(learner.actor, learner.critic, view, cfg.gamma, cfg.lambda);
  Rng actor_rng = rng.derive("actor_minibatch");
  Rng critic_rng = rng.derive("critic_minibatch");
  const PolicyTerm pt{&adv, 1.0, "policy"};
  const ValueTerm vt{&adv, 1.0, "value"};
  const auto ps = train_actor(learner.actor, learner.actor_opt, std::span(&pt, 1), cfg, lr, actor_rng);
  const auto vs = train_critic(learner.critic, learner.critic_opt, std::span(&vt, 1), cfg, lr, critic_rng);
  PpoDiagnostics d;
  d.mean_return = batch.mean_return();
  d.policy_loss = ps.loss;
  d.value_loss = vs.loss;
  d.entropy = ps.policy.entropy;
  d.clip_frac = ps.policy.clip_frac;
  d.approx_kl = ps.policy.approx_kl;
  return d;
}

RecurrentLearner RecurrentLearner::create(int obs_dim, int num_actions, int embed, int hidden, int head, Rng& rng) {
  RecurrentLearner l;
  l.net = nn::init_params<double>(nn::ShapeDescriptor::recurrent(obs_dim, num_actions, embed, hidden, head), true, rng);
  l.opt = nn::AdamState(l.net.size());
  return l;
}

namespace {

// Episodes laid out time-major. Episodes are sorted by decreasing length so
// the ones still running at step t are always a prefix of the column set.
struct SequenceLayout {
  std::vector<Matrix> inputs;                  // per t: input_dim x n_t
  std::vector<std::vector<Eigen::Index>> idx;  // per t: flat sample index of each column
};

SequenceLayout sequence_layout(const Matrix& x, const SlotView& view, std::vector<std::size_t> episodes) {
  auto len = [&](std::size_t e) {
    const std::size_t hi = e + 1 < view.episode_begin.size() ? view.episode_begin[e + 1] : view.size();
    return hi - view.episode_begin[e];
  };
  std::stable_sort(episodes.begin(), episodes.end(), [&](std::size_t a, std::size_t b) { return len(a) > len(b); });
  SequenceLayout s;
  const std::size_t t_max = episodes.empty() ? 0 : len(episodes.front());
  for (std::size_t t = 0; t < t_max; ++t) {
    std::vector<Eigen::Index> cols;
    for (std::size_t e : episodes) {
      if (len(e) <= t) break;
      cols.push_back(static_cast<Eigen::Index>(view.episode_begin[e] + t));
    }
    Matrix in(x.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) in.col(static_cast<Eigen::Index>(c)) = x.col(cols[c]);
    s.inputs.push_back(std::move(in));
    s.idx.push_back(std::move(cols));
  }
  return s;
}

// Recurrent inputs [obs_t, onehot(a_{t-1})] for every flat sample.
Matrix recurrent_inputs(const SlotView& view, int num_actions) {
  const auto n = static_cast<Eigen::Index>(view.size());
  Matrix x = Matrix::Zero(view.obs.rows() + num_actions, n);
  x.topRows(view.obs.rows()) = view.obs;
  std::size_t e = 0;
  for (std::size_t k = 0; k < view.size(); ++k) {
    while (e + 1 < view.episode_begin.size() && view.episode_begin[e + 1] <= k) ++e;
    if (k > view.episode_begin[e]) x(view.obs.rows() + view.actions[k - 1], static_cast<Eigen::Index>(k)) = 1.0;
  }
  return x;
}

}  // namespace

PpoDiagnostics recurrent_ppo_update(RecurrentLearner& learner, const TrajectoryBatch& batch, int slot,
                                    const PpoConfig& cfg, double lr, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("recurrent_ppo_update: empty batch");
  const auto& shape = learner.net.shape();
  const int num_actions = shape.dims[4];
  const int hidden = shape.dims[2];
  const SlotView view = slot_view(batch, slot);
  const auto n = static_cast<Eigen::Index>(view.size());
  const Matrix x = recurrent_inputs(view, num_actions);

  // old policy and values over the whole batch
  std::vector<std::size_t> all(view.episode_begin.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  Vector old_lp(n), old_v(n);
  {
    const SequenceLayout s = sequence_layout(x, view, all);
    Matrix h = Matrix::Zero(hidden, s.inputs.empty() ? 0 : s.inputs.front().cols());
    for (std::size_t t = 0; t < s.inputs.size(); ++t) {
      const Eigen::Index nt = s.inputs[t].cols();
      const auto out = nn::recurrent_step(learner.net, Matrix(h.leftCols(nt)), s.inputs[t]);
      const Matrix logp = nn::log_softmax(out.logits);
      for (Eigen::Index c = 0; c < nt; ++c) {
        const Eigen::Index k = s.idx[t][static_cast<std::size_t>(c)];
        old_lp[k] = logp(view.actions[static_cast<std::size_t>(k)], c);
        old_v[k] = out.values(0, c);
      }
      h = out.hidden;
    }
  }
  Vector adv(n), targets(n);
  for (std::size_t e = 0; e < view.episode_begin.size(); ++e) {
    const std::size_t lo = view.episode_begin[e];
    const std::size_t hi = e + 1 < view.episode_begin.size() ? view.episode_begin[e + 1] : view.size();
    if (hi == lo) continue;
    const auto r = gae(std::span(view.rewards).subspan(lo, hi - lo), std::span<const Real>(old_v.data() + lo, hi - lo),
                       0.0, std::span(view.dones).subspan(lo, hi - lo), cfg.gamma, cfg.lambda);
    adv.segment(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo)) = r.advantages;
    targets.segment(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo)) = r.value_targets;
  }
  if (cfg.normalize_advantages) normalize(adv);

  const int m = std::clamp(cfg.minibatches, 1, static_cast<int>(all.size()));
  Rng mb_rng = rng.derive("recurrent_minibatch");
  PpoDiagnostics d;
  d.mean_return = batch.mean_return();
  int steps = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const auto perm = shuffled(static_cast<Eigen::Index>(all.size()), mb_rng);
    for (int k = 0; k < m; ++k) {
      const auto part = chunk(perm, k, m);
      std::vector<std::size_t> eps(part.begin(), part.end());
      const SequenceLayout s = sequence_layout(x, view, eps);
      const std::size_t t_max = s.inputs.size();
      std::vector<nn::RecurrentStepCache<double>> caches(t_max);
      std::vector<Eigen::Index> offset(t_max + 1, 0);
      for (std::size_t t = 0; t < t_max; ++t) offset[t + 1] = offset[t] + s.inputs[t].cols();
      const Eigen::Index nm = offset[t_max];
      Matrix logits(num_actions, nm), values(1, nm);
      std::vector<int> actions(static_cast<std::size_t>(nm));
      Vector a_m(nm), lp_m(nm), targ_m(nm);
      Matrix h = Matrix::Zero(hidden, t_max ? s.inputs.front().cols() : 0);
      for (std::size_t t = 0; t < t_max; ++t) {
        const Eigen::Index nt = s.inputs[t].cols();
        const auto out = nn::recurrent_step(learner.net, Matrix(h.leftCols(nt)), s.inputs[t], &caches[t]);
        logits.middleCols(offset[t], nt) = out.logits;
        values.middleCols(offset[t], nt) = out.values;
        for (Eigen::Index c = 0; c < nt; ++c) {
          const Eigen::Index kk = s.idx[t][static_cast<std::size_t>(c)];
          const Eigen::Index j = offset[t] + c;
          actions[static_cast<std::size_t>(j)] = view.actions[static_cast<std::size_t>(kk)];
          a_m[j] = adv[kk];
          lp_m[j] = old_lp[kk];
          targ_m[j] = targets[kk];
        }
        h = out.hidden;
      }
      PolicyLossStats st;
      const auto pl = ppo_clip_logits_loss(logits, actions, a_m, lp_m, cfg.clip_eps, cfg.ent_coef, 1.0, "policy", &st);
      const auto vl = value_output_loss(values, targ_m, cfg.vf_coef, "value");
      nn::check_finite(pl.terms);
      nn::check_finite(vl.terms);

      Vector grad = Vector::Zero(learner.net.size());
      Matrix dh = Matrix::Zero(hidden, 0);
      for (std::size_t t = t_max; t-- > 0;) {
        const Eigen::Index nt = s.inputs[t].cols();
        Matrix dh_full = Matrix::Zero(hidden, nt);
        dh_full.leftCols(dh.cols()) = dh;
        dh = nn::recurrent_step_backward(learner.net, caches[t], Matrix(pl.d_outputs.middleCols(offset[t], nt)),
                                         Matrix(vl.d_outputs.middleCols(offset[t], nt)), dh_full, grad);
      }
      nn::clip_grad_norm(grad, cfg.max_grad_norm);
      nn::adam_update(learner.net, grad, learner.opt, lr);
      d.policy_loss += pl.total();
      d.value_loss += nm ? (values.row(0).transpose() - targ_m).squaredNorm() / static_cast<double>(nm) : 0.0;
      d.entropy += st.entropy;
      d.clip_frac += st.clip_frac;
      d.approx_kl += st.approx_kl;
      ++steps;
    }
  }
  if (steps) {
    const double s = 1.0 / steps;
    d.policy_loss *= s;
    d.value_loss *= s;
    d.entropy *= s;
    d.clip_frac *= s;
    d.approx_kl *= s;
  }
  return d;
}

}  // namespace aht::ppo
