#include <cmath>
#include <stdexcept>

#include "aht/agents/policies.hpp"
#include "aht/baselines/baselines.hpp"
#include "aht/core/rollout.hpp"

namespace aht::baselines {

IppoResult ippo_train(const Environment& env, const IppoConfig& cfg, const Rng& rng, const IppoCallback& cb) {
  cfg.ppo.validate();
  const auto& desc = env.descriptor();
  IppoResult res;
  Rng init0 = rng.derive("init", 0), init1 = rng.derive("init", 1);
  res.agent0 = ppo::ActorCritic::create(desc.obs_dim, desc.num_actions, cfg.hidden, init0);
  res.agent1 = ppo::ActorCritic::create(desc.obs_dim, desc.num_actions, cfg.hidden, init1);
  for (long u = 0; res.env_steps < cfg.ppo.total_timesteps; ++u) {
    const Rng ur = rng.derive("update", static_cast<std::uint64_t>(u));
    agents::MlpPolicy p0(res.agent0.actor), p1(res.agent1.actor);
    const auto data = rollout(env, p0, p1, StartSpec::initial(), cfg.ppo.num_envs, ur.derive("rollout"));
    const double lr = cfg.ppo.lr_at(res.env_steps);
    res.env_steps += static_cast<long>(data.batch.num_transitions());
    Rng r0 = ur.derive("train", 0), r1 = ur.derive("train", 1);
    const auto d = ppo::ppo_update(res.agent0, data.batch, 0, cfg.ppo, lr, r0);
    ppo::ppo_update(res.agent1, data.batch, 1, cfg.ppo, lr, r1);
    if (!std::isfinite(d.policy_loss) || !std::isfinite(d.value_loss))
      throw std::runtime_error("ippo: non-finite loss");
    res.curve.push_back({u + 1, res.env_steps, data.batch.mean_raw_return()});
    if (cb) cb(res, u + 1);
  }
  return res;
}

nn::ParamSet ippo_selfplay(const Environment& env, const IppoConfig& cfg, const Rng& rng) {
  return ippo_train(env, cfg, rng).agent1.actor;
}

}  // namespace aht::baselines
