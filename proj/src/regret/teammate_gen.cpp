#include "aht/regret/teammate_gen.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "aht/agents/policies.hpp"
#include "aht/nn/backprop.hpp"
#include "aht/nn/checkpoint.hpp"
#include "aht/nn/init.hpp"

namespace aht::regret {

namespace {

TrajectoryBatch merge(std::initializer_list<const TrajectoryBatch*> parts) {
  TrajectoryBatch out;
  for (const auto* p : parts)
    if (p) out.episodes.insert(out.episodes.end(), p->episodes.begin(), p->episodes.end());
  return out;
}

// PPO inputs for the teammate slot with an externally supplied target.
ppo::AdvantageBatch target_batch(const nn::ParamSet& actor, const ppo::SlotView& view, Vector targets) {
  ppo::AdvantageBatch b;
  b.obs = view.obs;
  b.actions = view.actions;
  b.old_log_probs = view.size() ? ppo::action_log_probs(actor, view.obs, view.actions) : Vector();
  b.advantages = std::move(targets);
  b.value_targets = Vector::Zero(b.advantages.size());
  b.old_values = Vector::Zero(b.advantages.size());
  return b;
}

double mean(const Vector& v) { return v.size() ? v.mean() : 0.0; }

}  // namespace

const char* to_string(RegretMode m) {
  switch (m) {
    case RegretMode::per_state: return "per_state";
    case RegretMode::per_trajectory: return "per_trajectory";
    case RegretMode::gae_regret: return "gae_regret";
    case RegretMode::mixed_play: return "mixed_play";
  }
  return "?";
}

RegretMode parse_regret_mode(const std::string& s) {
  for (auto m : {RegretMode::per_state, RegretMode::per_trajectory, RegretMode::gae_regret, RegretMode::mixed_play})
    if (s == to_string(m)) return m;
  throw std::invalid_argument("unknown regret mode: " + s);
}

void TeammateGenConfig::validate() const {
  ppo.validate();
  if (updates < 0) throw std::invalid_argument("teammate: updates must be >= 0");
  if (counts.sp < 1 || counts.xp < 1) throw std::invalid_argument("teammate: SP and XP episode counts must be >= 1");
  if (counts.sxp < 0 || counts.mp < 0) throw std::invalid_argument("teammate: episode counts must be >= 0");
  if (mode == RegretMode::per_state || mode == RegretMode::gae_regret)
    if (counts.sxp < 1) throw std::invalid_argument(std::string("teammate: mode ") + to_string(mode) + " needs SXP episodes");
  if (mode == RegretMode::mixed_play && counts.mp < 1)
    throw std::invalid_argument("teammate: mode mixed_play needs MP episodes");
  if (regret_weight < 0.0) throw std::invalid_argument("teammate: regret_weight must be >= 0");
  if (mixture_ego_prob < 0.0 || mixture_ego_prob > 1.0)
    throw std::invalid_argument("teammate: mixture_ego_prob must lie in [0,1]");
  if (hidden < 1) throw std::invalid_argument("teammate: hidden must be >= 1");
}

TeammateGenState TeammateGenState::create(const EnvDescriptor& env, int hidden, RegretMode mode, Rng& rng) {
  const auto actor_shape = nn::ShapeDescriptor::mlp(env.obs_dim, {hidden, hidden}, env.num_actions);
  const auto critic_shape = nn::ShapeDescriptor::mlp(env.obs_dim, {hidden, hidden}, 1);
  auto make = [&](const nn::ShapeDescriptor& shape, bool policy, const char* name) {
    Rng r = rng.derive(name);
    return nn::init_params<double>(shape, policy, r);
  };
  TeammateGenState s;
  s.teammate = make(actor_shape, true, "teammate");
  s.br = make(actor_shape, true, "br");
  s.br_critic = make(critic_shape, false, "br_critic");
  s.tm_br_critic = make(critic_shape, false, "tm_br_critic");
  s.tm_ego_critic = make(critic_shape, false, "tm_ego_critic");
  s.teammate_opt = nn::AdamState(s.teammate.size());
  s.br_opt = nn::AdamState(s.br.size());
  s.br_critic_opt = nn::AdamState(s.br_critic.size());
  s.tm_br_critic_opt = nn::AdamState(s.tm_br_critic.size());
  s.tm_ego_critic_opt = nn::AdamState(s.tm_ego_critic.size());
  s.mode = mode;
  return s;
}

Interactions collect_interactions(const TeammateGenState& state, Policy& ego, const Environment& env,
                                  const InteractionCounts& counts, const Rng& rng, bool restart_from_states) {
  agents::MlpPolicy tm(state.teammate), br(state.br);
  // SP and XP share one stream so their initial states coincide
  const Rng initial = rng.derive("initial");
  Interactions out;
  out.sp = rollout(env, br, tm, StartSpec::initial(), counts.sp, initial, {Mode::SP, false}).batch;
  const bool capture = restart_from_states && counts.sxp > 0;
  auto xp = rollout(env, ego, tm, StartSpec::initial(), counts.xp, initial, {Mode::XP, capture});
  out.xp = std::move(xp.batch);
  if (counts.sxp <= 0) return out;

  if (!restart_from_states) {
    out.sxp = rollout_with_switch(env, ego, br, tm, counts.sxp, rng.derive("sxp"), Mode::SXP).batch;
    return out;
  }
  std::vector<EnvSnapshot> visited;
  for (auto& ep : xp.captured) visited.insert(visited.end(), ep.begin(), ep.end());
  if (visited.empty()) throw std::runtime_error("collect_interactions: empty XP data before SXP sampling");
  Rng pick = rng.derive("sxp_states");
  for (int i = 0; i < counts.sxp; ++i) out.sxp_starts.push_back(visited[pick.uniform_index(visited.size())]);
  out.sxp = rollout(env, br, tm, StartSpec::from_states(out.sxp_starts), counts.sxp, rng.derive("sxp"),
                    {Mode::SXP, false})
                .batch;
  return out;
}

MixedPlayData mixed_play_collect(const TeammateGenState& state, Policy& ego, const Environment& env, int count,
                                 const Rng& rng, double ego_prob) {
  agents::MlpPolicy tm(state.teammate), br(state.br);
  agents::MixturePolicy mix(ego, br, ego_prob);
  MixedPlayData out;
  auto starts = rollout(env, mix, tm, StartSpec::initial(), count, rng.derive("initial"), {Mode::MP, true});
  out.start_rollouts = std::move(starts.batch);
  std::vector<EnvSnapshot> visited;
  for (auto& ep : starts.captured) visited.insert(visited.end(), ep.begin(), ep.end());
  if (visited.empty()) throw std::runtime_error("mixed_play_collect: no visited states to start from");
  Rng pick = rng.derive("mp_states");
  for (int i = 0; i < count; ++i) out.starts.push_back(visited[pick.uniform_index(visited.size())]);
  out.mp = rollout(env, br, tm, StartSpec::from_states(out.starts), count, rng.derive("mp"), {Mode::MP, false}).batch;
  return out;
}

double regret_target(const nn::ParamSet& tm_br_critic, const nn::ParamSet& tm_ego_critic, const Vector& obs,
                     double reward, const Vector* next_obs, double gamma) {
  const double v_br = nn::mlp_forward(tm_br_critic, obs)(0, 0);
  const double v_next = next_obs ? nn::mlp_forward(tm_ego_critic, *next_obs)(0, 0) : 0.0;
  return v_br - (reward + gamma * v_next);
}

Vector regret_targets(const nn::ParamSet& tm_br_critic, const nn::ParamSet& tm_ego_critic,
                      const TrajectoryBatch& xp, double gamma) {
  for (const auto& ep : xp.episodes)
    for (const auto& t : ep)
      if (t.mode != Mode::XP) throw std::invalid_argument("regret_target: transition is not XP");
  const ppo::SlotView view = ppo::slot_view(xp, kTeammateSlot);
  const auto n = static_cast<Eigen::Index>(view.size());
  if (n == 0) return Vector();
  const Vector v_br = nn::mlp_forward(tm_br_critic, view.obs).row(0).transpose();
  const Vector v_next = ppo::next_state_values(tm_ego_critic, view.obs, view.dones);
  const Vector r = Eigen::Map<const Vector>(view.rewards.data(), n);
  return v_br - (r + gamma * v_next);
}

std::vector<ppo::PolicyTerm> TeammateTerms::policy_terms() const {
  std::vector<ppo::PolicyTerm> out;
  for (std::size_t i = 0; i < batches.size(); ++i) out.push_back({&batches[i], weights[i], names[i], normalize[i]});
  return out;
}

TeammateTerms teammate_policy_terms(const TeammateGenState& state, const TeammateBatches& data, RegretMode mode,
                                    const TeammateGenConfig& cfg) {
  auto require = [&](const TrajectoryBatch* b, const char* what) {
    if (!b)
      throw std::invalid_argument(std::string("teammate_policy_loss: mode ") + to_string(mode) + " requires " + what +
                                  " data");
  };
  const double gamma = cfg.ppo.gamma;
  const double lambda = cfg.ppo.lambda;
  TeammateTerms t;
  auto add = [&](ppo::AdvantageBatch b, double w, const char* name, bool norm) {
    t.batches.push_back(std::move(b));
    t.weights.push_back(w);
    t.names.push_back(name);
    t.normalize.push_back(norm);
  };
  auto return_term = [&](const TrajectoryBatch& b) {
    return ppo::gae_batch(state.teammate, state.tm_br_critic, ppo::slot_view(b, kTeammateSlot), gamma, lambda);
  };
  // -A from the teammate's critic with the ego: pushes XP return down
  auto xp_min_term = [&](double lam) {
    auto b = ppo::gae_batch(state.teammate, state.tm_ego_critic, ppo::slot_view(*data.xp, kTeammateSlot), gamma, lam);
    b.advantages = -b.advantages;
    return b;
  };

  switch (mode) {
    case RegretMode::per_state: {
      require(data.sp, "SP");
      require(data.sxp, "SXP");
      require(data.xp, "XP");
      add(return_term(merge({data.sp, data.sxp})), 1.0, "sp_sxp", true);
      const auto view = ppo::slot_view(*data.xp, kTeammateSlot);
      add(target_batch(state.teammate, view, regret_targets(state.tm_br_critic, state.tm_ego_critic, *data.xp, gamma)),
          cfg.regret_weight, "xp_regret", cfg.normalize_regret);
      break;
    }
    case RegretMode::per_trajectory:
      require(data.sp, "SP");
      require(data.xp, "XP");
      add(return_term(*data.sp), 1.0, "sp", true);
      add(xp_min_term(1.0), cfg.regret_weight, "xp_regret", cfg.normalize_regret);
      break;
    case RegretMode::gae_regret:
      require(data.sp, "SP");
      require(data.sxp, "SXP");
      require(data.xp, "XP");
      add(return_term(merge({data.sp, data.sxp})), 1.0, "sp_sxp", true);
      add(xp_min_term(lambda), cfg.regret_weight, "xp_regret", cfg.normalize_regret);
      break;
    case RegretMode::mixed_play:
      require(data.sp, "SP");
      require(data.xp, "XP");
      require(data.mp, "MP");
      add(return_term(*data.sp), 1.0, "sp", true);
      add(xp_min_term(1.0), cfg.regret_weight, "xp_regret", cfg.normalize_regret);
      add(return_term(*data.mp), 1.0, "mp", true);
      break;
  }
  return t;
}

double teammate_policy_loss(const nn::ParamSet& teammate, const TeammateTerms& terms, const TeammateGenConfig& cfg) {
  double total = 0.0;
  for (std::size_t i = 0; i < terms.batches.size(); ++i) {
    const auto& b = terms.batches[i];
    if (b.size() == 0) continue;
    Vector adv = b.advantages;
    if (cfg.ppo.normalize_advantages && terms.normalize[i]) ppo::normalize(adv);
    const auto l = ppo::ppo_clip_logits_loss(nn::mlp_forward(teammate, b.obs), b.actions, adv, b.old_log_probs,
                                             cfg.ppo.clip_eps, cfg.ppo.ent_coef, terms.weights[i], terms.names[i]);
    nn::check_finite(l.terms);
    total += l.total();
  }
  return total;
}

nlohmann::json GenDiagnostics::to_json() const {
  return {{"update", update},           {"mean_regret", mean_regret},     {"sp_return", sp_return},
          {"xp_return", xp_return},     {"sxp_return", sxp_return},       {"teammate_loss", teammate_loss},
          {"br_loss", br_loss},         {"teammate_entropy", teammate_entropy}, {"env_steps", env_steps}};
}

TeammateGenResult generate_teammate(Policy& ego, const Environment& env, const TeammateGenConfig& cfg,
                                    const Rng& rng) {
  cfg.validate();
  Rng init = rng.derive("init");
  TeammateGenResult res;
  res.state = TeammateGenState::create(env.descriptor(), cfg.hidden, cfg.mode, init);
  auto& st = res.state;
  const bool uses_sxp = cfg.mode == RegretMode::per_state || cfg.mode == RegretMode::gae_regret;
  InteractionCounts counts = cfg.counts;
  if (!uses_sxp) counts.sxp = 0;
  const double gamma = cfg.ppo.gamma;
  const double lambda = cfg.ppo.lambda;

  for (int u = 0; u < cfg.updates; ++u) {
    const Rng ur = rng.derive("update", static_cast<std::uint64_t>(u));
    Interactions in = collect_interactions(st, ego, env, counts, ur.derive("collect"), cfg.restart_from_states);
    std::optional<MixedPlayData> mixed;
    if (cfg.mode == RegretMode::mixed_play)
      mixed = mixed_play_collect(st, ego, env, cfg.counts.mp, ur.derive("mixed"), cfg.mixture_ego_prob);

    const TeammateBatches data{&in.sp, &in.xp, uses_sxp ? &in.sxp : nullptr, mixed ? &mixed->mp : nullptr};
    const TeammateTerms terms = teammate_policy_terms(st, data, cfg.mode, cfg);

    // everything played with the BR trains the BR and both BR-side critics
    const TrajectoryBatch with_br = merge({&in.sp, uses_sxp ? &in.sxp : nullptr, mixed ? &mixed->mp : nullptr});
    const auto br_adv = ppo::gae_batch(st.br, st.br_critic, ppo::slot_view(with_br, kEgoSlot), gamma, lambda);
    const auto tm_br_adv =
        ppo::gae_batch(st.teammate, st.tm_br_critic, ppo::slot_view(with_br, kTeammateSlot), gamma, lambda);
    const auto tm_ego_adv =
        ppo::gae_batch(st.teammate, st.tm_ego_critic, ppo::slot_view(in.xp, kTeammateSlot), gamma, lambda);

    GenDiagnostics d;
    d.update = u;
    d.mean_regret = mean(regret_targets(st.tm_br_critic, st.tm_ego_critic, in.xp, gamma));
    d.sp_return = in.sp.mean_raw_return();
    d.xp_return = in.xp.mean_raw_return();
    d.sxp_return = in.sxp.mean_raw_return();
    d.env_steps = static_cast<long>(in.sp.num_transitions() + in.xp.num_transitions() + in.sxp.num_transitions());
    if (mixed) d.env_steps += static_cast<long>(mixed->mp.num_transitions() + mixed->start_rollouts.num_transitions());

    const double lr = cfg.ppo.lr_at(res.env_steps);
    Rng r_tm = ur.derive("teammate_minibatch");
    Rng r_br = ur.derive("br_minibatch");
    Rng r_c1 = ur.derive("br_critic_minibatch");
    Rng r_c2 = ur.derive("tm_br_critic_minibatch");
    Rng r_c3 = ur.derive("tm_ego_critic_minibatch");
    const auto tm_terms = terms.policy_terms();
    const auto ts = ppo::train_actor(st.teammate, st.teammate_opt, tm_terms, cfg.ppo, lr, r_tm);
    const ppo::PolicyTerm br_term{&br_adv, 1.0, "br", true};
    const auto bs = ppo::train_actor(st.br, st.br_opt, std::span(&br_term, 1), cfg.ppo, lr, r_br);
    const ppo::ValueTerm v1{&br_adv, 1.0, "br_value"};
    const ppo::ValueTerm v2{&tm_br_adv, 1.0, "tm_br_value"};
    const ppo::ValueTerm v3{&tm_ego_adv, 1.0, "tm_ego_value"};
    ppo::train_critic(st.br_critic, st.br_critic_opt, std::span(&v1, 1), cfg.ppo, lr, r_c1);
    ppo::train_critic(st.tm_br_critic, st.tm_br_critic_opt, std::span(&v2, 1), cfg.ppo, lr, r_c2);
    ppo::train_critic(st.tm_ego_critic, st.tm_ego_critic_opt, std::span(&v3, 1), cfg.ppo, lr, r_c3);

    d.teammate_loss = ts.loss;
    d.br_loss = bs.loss;
    d.teammate_entropy = ts.policy.entropy;
    res.env_steps += d.env_steps;
    res.diagnostics.push_back(d);
  }
  res.teammate = st.teammate;
  return res;
}

std::filesystem::path save_teammate(const std::filesystem::path& dir, int iter, const nn::ParamSet& teammate,
                                    const nlohmann::json& sidecar) {
  std::filesystem::create_directories(dir);
  char name[32];
  std::snprintf(name, sizeof name, "teammate_%04d", iter);
  const auto ckpt = dir / (std::string(name) + ".ckpt");
  nn::save_checkpoint(ckpt, teammate);
  std::ofstream js(dir / (std::string(name) + ".json"));
  if (!js) throw std::runtime_error("cannot write " + (dir / (std::string(name) + ".json")).string());
  js << sidecar.dump(2) << '\n';
  return ckpt;
}

}  // namespace aht::regret
