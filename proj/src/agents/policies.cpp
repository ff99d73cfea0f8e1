#include "aht/agents/policies.hpp"

#include <algorithm>

#include "aht/nn/backprop.hpp"
#include "aht/nn/recurrent.hpp"

namespace aht::agents {

namespace {

void write_softmax(const Matrix& logits, std::span<Real> probs) {
  const Matrix p = nn::softmax(logits);
  for (std::size_t i = 0; i < probs.size(); ++i) probs[i] = p(static_cast<Eigen::Index>(i), 0);
}

Eigen::Map<const Matrix> column(std::span<const Real> obs) {
  return {obs.data(), static_cast<Eigen::Index>(obs.size()), 1};
}

}  // namespace

MlpPolicy::MlpPolicy(nn::ParamSet actor) : actor_(std::move(actor)) {
  if (actor_.shape().kind != nn::NetKind::mlp) throw std::invalid_argument("MlpPolicy: not an mlp");
}

void MlpPolicy::action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                             std::span<Real> probs) {
  (void)env;
  (void)agent;
  (void)rng;
  write_softmax(nn::mlp_forward(actor_, column(obs)), probs);
}

RecurrentPolicy::RecurrentPolicy(nn::ParamSet net) : net_(std::move(net)) {
  if (net_.shape().kind != nn::NetKind::recurrent) throw std::invalid_argument("RecurrentPolicy: not recurrent");
  hidden_ = Vector::Zero(net_.shape().dims[2]);
}

void RecurrentPolicy::begin_episode(const Environment& env, int agent) {
  (void)env;
  (void)agent;
  hidden_.setZero();
  pending_.resize(0);
  last_action_ = -1;
}

void RecurrentPolicy::action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                                   std::span<Real> probs) {
  (void)env;
  (void)agent;
  (void)rng;
  const int num_actions = net_.shape().dims[4];
  Matrix x = Matrix::Zero(static_cast<Eigen::Index>(obs.size()) + num_actions, 1);
  x.topRows(static_cast<Eigen::Index>(obs.size())) = column(obs);
  if (last_action_ >= 0) x(static_cast<Eigen::Index>(obs.size()) + last_action_, 0) = 1.0;
  const auto out = nn::recurrent_step(net_, Matrix(hidden_), x);
  pending_ = out.hidden.col(0);
  write_softmax(out.logits, probs);
}

void RecurrentPolicy::observe_action(int action) {
  if (pending_.size()) hidden_ = pending_;
  last_action_ = action;
}

void UniformPolicy::action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                                 std::span<Real> probs) {
  (void)env;
  (void)agent;
  (void)obs;
  (void)rng;
  std::fill(probs.begin(), probs.end(), 1.0 / static_cast<double>(probs.size()));
}

void FixedActionPolicy::action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                                     std::span<Real> probs) {
  (void)env;
  (void)agent;
  (void)obs;
  (void)rng;
  std::fill(probs.begin(), probs.end(), 0.0);
  probs[static_cast<std::size_t>(action_)] = 1.0;
}

MixturePolicy::MixturePolicy(Policy& first, Policy& second, double p_first)
    : first_(first), second_(second), p_first_(p_first) {}

void MixturePolicy::begin_episode(const Environment& env, int agent) {
  first_.begin_episode(env, agent);
  second_.begin_episode(env, agent);
}

void MixturePolicy::action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                                 std::span<Real> probs) {
  last_first_ = rng.bernoulli(p_first_);
  scratch_.resize(probs.size());
  if (last_first_) {
    first_.action_probs(env, agent, obs, rng, probs);
    second_.action_probs(env, agent, obs, rng, scratch_);
  } else {
    first_.action_probs(env, agent, obs, rng, scratch_);
    second_.action_probs(env, agent, obs, rng, probs);
  }
}

void MixturePolicy::observe_action(int action) {
  first_.observe_action(action);
  second_.observe_action(action);
}

std::unique_ptr<Policy> make_policy(const nn::ParamSet& params) {
  if (params.shape().kind == nn::NetKind::recurrent) return std::make_unique<RecurrentPolicy>(params);
  return std::make_unique<MlpPolicy>(params);
}

}  // namespace aht::agents
