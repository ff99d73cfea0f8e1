#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "aht/agents/policies.hpp"
#include "aht/baselines/baselines.hpp"
#include "aht/core/rollout.hpp"
#include "aht/nn/init.hpp"

namespace aht::baselines {

namespace fs = std::filesystem;

nn::ParamSet minimax_teammate(Policy& ego, const Environment& env, const MinimaxConfig& cfg, const Rng& rng,
                              long* env_steps) {
  cfg.ppo.validate();
  if (cfg.updates < 0) throw std::invalid_argument("minimax: updates must be >= 0");
  const auto& desc = env.descriptor();
  Rng init = rng.derive("init");
  auto tm = ppo::ActorCritic::create(desc.obs_dim, desc.num_actions, cfg.hidden, init);
  long steps = 0;
  for (int u = 0; u < cfg.updates; ++u) {
    const Rng ur = rng.derive("update", static_cast<std::uint64_t>(u));
    agents::MlpPolicy actor(tm.actor);
    auto batch = rollout(env, ego, actor, StartSpec::initial(), cfg.ppo.num_envs, ur.derive("rollout"),
                         {Mode::XP, false})
                     .batch;
    for (auto& ep : batch.episodes)
      for (auto& t : ep) t.reward = -t.reward;
    const double lr = cfg.ppo.lr_at(steps);
    steps += static_cast<long>(batch.num_transitions());
    Rng tr = ur.derive("train");
    ppo::ppo_update(tm, batch, 1, cfg.ppo, lr, tr);
  }
  if (env_steps) *env_steps = steps;
  return tm.actor;
}

open_ended::PopulationBuffer fcp_population(const Environment& env, int seeds, int checkpoints_per_seed,
                                            const IppoConfig& cfg, const Rng& rng) {
  if (seeds < 1 || checkpoints_per_seed < 1) throw std::invalid_argument("fcp: seeds and checkpoints must be >= 1");
  open_ended::PopulationBuffer pop;
  for (int s = 0; s < seeds; ++s) {
    std::vector<nn::ParamSet> snaps;
    std::vector<long> steps;
    ippo_train(env, cfg, rng.derive("seed", static_cast<std::uint64_t>(s)), [&](const IppoResult& r, long) {
      snaps.push_back(r.agent1.actor);
      steps.push_back(r.env_steps);
    });
    if (snaps.empty()) throw std::runtime_error("fcp: IPPO run performed no updates");
    const auto total = static_cast<long>(snaps.size());
    long prev = -1;
    for (int c = 1; c <= checkpoints_per_seed; ++c) {
      // evenly spaced in update count, the last update included
      long idx = (total * c + checkpoints_per_seed - 1) / checkpoints_per_seed - 1;
      idx = std::max(idx, std::min(prev + 1, total - 1));
      prev = idx;
      char name[48];
      std::snprintf(name, sizeof name, "fcp_s%02d_c%02d", s, c);
      pop.append({snaps[static_cast<std::size_t>(idx)], static_cast<int>(pop.size() + 1), name,
                  {{"seed", s}, {"update", idx + 1}, {"env_steps", steps[static_cast<std::size_t>(idx)]}}});
    }
  }
  return pop;
}

namespace {

// obs plus one-hots of confederate and BR index
Matrix pair_obs(const Matrix& obs, int i, int j, int n) {
  Matrix out = Matrix::Zero(obs.rows() + 2 * n, obs.cols());
  out.topRows(obs.rows()) = obs;
  out.row(obs.rows() + i).setOnes();
  out.row(obs.rows() + n + j).setOnes();
  return out;
}

}  // namespace

BrdivResult brdiv_train(const Environment& env, const BrdivConfig& cfg, const Rng& rng) {
  cfg.ppo.validate();
  if (cfg.n < 2) throw std::invalid_argument("brdiv: n must be >= 2");
  if (cfg.xp_weight < 0.0) throw std::invalid_argument("brdiv: xp_weight must be >= 0");
  if (cfg.episodes_per_pair < 1) throw std::invalid_argument("brdiv: episodes_per_pair must be >= 1");
  const auto& desc = env.descriptor();
  const int n = cfg.n;
  const double w = cfg.xp_weight;
  std::vector<ppo::ActorCritic> conf, brs;
  for (int i = 0; i < n; ++i) {
    Rng a = rng.derive("conf_init", static_cast<std::uint64_t>(i));
    Rng b = rng.derive("br_init", static_cast<std::uint64_t>(i));
    conf.push_back(ppo::ActorCritic::create(desc.obs_dim, desc.num_actions, cfg.hidden, a));
    brs.push_back(ppo::ActorCritic::create(desc.obs_dim, desc.num_actions, cfg.hidden, b));
  }
  // shared id-conditioned critics, one per side
  Rng ci = rng.derive("critic_init");
  const auto critic_shape = nn::ShapeDescriptor::mlp(desc.obs_dim + 2 * n, {cfg.hidden, cfg.hidden}, 1);
  nn::ParamSet conf_critic = nn::init_params<double>(critic_shape, false, ci);
  nn::ParamSet br_critic = nn::init_params<double>(critic_shape, false, ci);
  nn::AdamState conf_critic_opt(conf_critic.size()), br_critic_opt(br_critic.size());

  BrdivResult res;
  res.xp_matrix = Matrix::Zero(n, n);
  res.pairings_per_update = static_cast<long>(n) * n;
  for (int u = 0; u < cfg.updates; ++u) {
    const Rng ur = rng.derive("update", static_cast<std::uint64_t>(u));
    // adv[side][i*n+j]: pair (confederate i, BR j)
    std::vector<ppo::AdvantageBatch> conf_adv, br_adv;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) {
        agents::MlpPolicy c(conf[static_cast<std::size_t>(i)].actor), b(brs[static_cast<std::size_t>(j)].actor);
        const auto batch = rollout(env, b, c, StartSpec::initial(), cfg.episodes_per_pair,
                                   ur.derive("pair", static_cast<std::uint64_t>(i * n + j)),
                                   {i == j ? Mode::SP : Mode::XP, false})
                               .batch;
        res.env_steps += static_cast<long>(batch.num_transitions());
        res.xp_matrix(i, j) = batch.mean_raw_return();
        const auto cv = ppo::slot_view(batch, 1);
        const auto bv = ppo::slot_view(batch, 0);
        const Matrix cobs = pair_obs(cv.obs, i, j, n), bobs = pair_obs(bv.obs, i, j, n);
        conf_adv.push_back(ppo::gae_batch(conf[static_cast<std::size_t>(i)].actor, conf_critic, cv, cfg.ppo.gamma,
                                          cfg.ppo.lambda, &cobs));
        br_adv.push_back(ppo::gae_batch(brs[static_cast<std::size_t>(j)].actor, br_critic, bv, cfg.ppo.gamma,
                                        cfg.ppo.lambda, &bobs));
      }
    // sign-flipped copies for the cross-play terms
    auto flipped = [](ppo::AdvantageBatch b) {
      b.advantages = -b.advantages;
      return b;
    };
    std::vector<ppo::AdvantageBatch> conf_neg, br_neg;
    for (int k = 0; k < n * n; ++k) {
      conf_neg.push_back(flipped(conf_adv[static_cast<std::size_t>(k)]));
      br_neg.push_back(flipped(br_adv[static_cast<std::size_t>(k)]));
    }
    const double lr = cfg.ppo.lr_at(res.env_steps);
    for (int a = 0; a < n; ++a) {
      std::vector<ppo::PolicyTerm> ct, bt;
      for (int b = 0; b < n; ++b) {
        const auto ij = static_cast<std::size_t>(a * n + b);  // confederate a with BR b
        const auto ji = static_cast<std::size_t>(b * n + a);  // confederate b with BR a
        if (a == b) {
          ct.push_back({&conf_adv[ij], 1.0 + 2.0 * w, "sp", true});
          bt.push_back({&br_adv[ji], 1.0 + 2.0 * w, "sp", true});
        } else if (w > 0.0) {
          ct.push_back({&conf_neg[ij], w, "xp", true});
          bt.push_back({&br_neg[ji], w, "xp", true});
        }
      }
      Rng r1 = ur.derive("conf_train", static_cast<std::uint64_t>(a));
      Rng r2 = ur.derive("br_train", static_cast<std::uint64_t>(a));
      auto& c = conf[static_cast<std::size_t>(a)];
      auto& b = brs[static_cast<std::size_t>(a)];
      ppo::train_actor(c.actor, c.actor_opt, ct, cfg.ppo, lr, r1);
      ppo::train_actor(b.actor, b.actor_opt, bt, cfg.ppo, lr, r2);
    }
    std::vector<ppo::ValueTerm> cv, bv;
    for (int k = 0; k < n * n; ++k) {
      cv.push_back({&conf_adv[static_cast<std::size_t>(k)], 1.0, "value"});
      bv.push_back({&br_adv[static_cast<std::size_t>(k)], 1.0, "value"});
    }
    Rng r3 = ur.derive("conf_critic_train"), r4 = ur.derive("br_critic_train");
    ppo::train_critic(conf_critic, conf_critic_opt, cv, cfg.ppo, lr, r3);
    ppo::train_critic(br_critic, br_critic_opt, bv, cfg.ppo, lr, r4);
  }
  for (int i = 0; i < n; ++i) {
    res.confederates.append({conf[static_cast<std::size_t>(i)].actor, i + 1, "brdiv_" + std::to_string(i),
                             {{"sp_return", res.xp_matrix(i, i)}}});
    res.best_responses.push_back(brs[static_cast<std::size_t>(i)].actor);
  }
  return res;
}

open_ended::PopulationBuffer brdiv_population(const Environment& env, const BrdivConfig& cfg, const Rng& rng) {
  return brdiv_train(env, cfg, rng).confederates;
}

void write_manifest(const fs::path& dir, const open_ended::PopulationBuffer& pop, const std::string& algorithm,
                    const nlohmann::json& provenance) {
  pop.save(dir);
  nlohmann::json members = nlohmann::json::array();
  for (const auto& m : pop.members())
    members.push_back({{"name", m.name}, {"file", m.name + ".ckpt"}, {"index", m.iteration}, {"info", m.diagnostics}});
  std::ofstream out(dir / "manifest.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "manifest.json").string());
  out << nlohmann::json{{"algorithm", algorithm}, {"size", pop.size()}, {"members", members}, {"provenance", provenance}}
             .dump(2)
      << '\n';
}

}  // namespace aht::baselines
