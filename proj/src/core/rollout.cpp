#include "aht/core/rollout.hpp"

#include <stdexcept>

namespace aht {
namespace {

struct EpisodeStreams {
  Rng env, action, policy_a, policy_b, schedule;
  EpisodeStreams(const Rng& base, int e)
      : env(base.derive("episode", e).derive("env")),
        action(base.derive("episode", e).derive("action")),
        policy_a(base.derive("episode", e).derive("policy", 0)),
        policy_b(base.derive("episode", e).derive("policy", 1)),
        schedule(base.derive("episode", e).derive("schedule")) {}
};

std::span<const Real> as_span(const Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

// Advances one joint step; returns the transition (mode left to the caller).
Transition joint_step(Environment& env, Policy& a, Policy& b, EpisodeStreams& rs, Vector& p0, Vector& p1) {
  Transition t;
  t.obs_self = env.observation(0);
  t.obs_other = env.observation(1);
  a.action_probs(env, 0, as_span(t.obs_self), rs.policy_a, std::span<Real>(p0.data(), p0.size()));
  b.action_probs(env, 1, as_span(t.obs_other), rs.policy_b, std::span<Real>(p1.data(), p1.size()));
  t.action_self = rs.action.categorical(std::span<const Real>(p0.data(), p0.size()));
  t.action_other = rs.action.categorical(std::span<const Real>(p1.data(), p1.size()));
  a.observe_action(t.action_self);
  b.observe_action(t.action_other);
  t.step_index = env.time_step();
  const StepOutcome out = env.step(t.action_self, t.action_other, rs.env);
  t.reward = out.reward;
  t.raw_reward = out.raw_reward;
  t.done = out.done;
  return t;
}

}  // namespace

RolloutResult rollout(const Environment& env, Policy& policy_a, Policy& policy_b, const StartSpec& start,
                      int num_episodes, const Rng& rng, const RolloutOptions& options) {
  if (start.kind == StartDistribution::xp_states && start.states.empty())
    throw std::invalid_argument("rollout: no restart states");
  if (num_episodes < 0) throw std::invalid_argument("rollout: negative episode count");

  const int num_actions = env.descriptor().num_actions;
  Vector p0(num_actions), p1(num_actions);
  RolloutResult result;
  result.batch.start_distribution = start.kind;
  result.batch.episodes.reserve(static_cast<std::size_t>(num_episodes));
  if (options.capture_states) result.captured.reserve(static_cast<std::size_t>(num_episodes));

  for (int e = 0; e < num_episodes; ++e) {
    EpisodeStreams rs(rng, e);
    std::unique_ptr<Environment> inst;
    if (start.kind == StartDistribution::initial) {
      inst = env.clone();
      inst->reset(rs.env);
    } else {
      inst = start.states[static_cast<std::size_t>(e) % start.states.size()]->clone();
    }
    policy_a.begin_episode(*inst, 0);
    policy_b.begin_episode(*inst, 1);

    Episode episode;
    std::vector<EnvSnapshot> snaps;
    while (!inst->terminal()) {
      if (options.capture_states) snaps.push_back(inst->clone());
      Transition t = joint_step(*inst, policy_a, policy_b, rs, p0, p1);
      t.mode = options.mode;
      episode.push_back(std::move(t));
    }
    result.batch.episodes.push_back(std::move(episode));
    if (options.capture_states) result.captured.push_back(std::move(snaps));
  }
  return result;
}

RolloutResult rollout_with_switch(const Environment& env, Policy& prefix_a, Policy& policy_a, Policy& policy_b,
                                  int num_episodes, const Rng& rng, Mode mode) {
  const int num_actions = env.descriptor().num_actions;
  const int horizon = env.descriptor().horizon;
  Vector p0(num_actions), p1(num_actions);
  RolloutResult result;
  result.batch.start_distribution = StartDistribution::xp_states;

  for (int e = 0; e < num_episodes; ++e) {
    EpisodeStreams rs(rng, e);
    auto inst = env.clone();
    inst->reset(rs.env);
    const int switch_at = static_cast<int>(rs.schedule.uniform_index(static_cast<std::size_t>(horizon)));
    prefix_a.begin_episode(*inst, 0);
    policy_b.begin_episode(*inst, 1);
    while (!inst->terminal() && inst->time_step() < switch_at) joint_step(*inst, prefix_a, policy_b, rs, p0, p1);

    Episode episode;
    if (!inst->terminal()) policy_a.begin_episode(*inst, 0);
    while (!inst->terminal()) {
      Transition t = joint_step(*inst, policy_a, policy_b, rs, p0, p1);
      t.mode = mode;
      episode.push_back(std::move(t));
    }
    if (!episode.empty()) result.batch.episodes.push_back(std::move(episode));
  }
  return result;
}

}  // namespace aht
