#include "aht/open_ended/open_ended.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "aht/agents/policies.hpp"
#include "aht/core/rollout.hpp"
#include "aht/nn/checkpoint.hpp"

namespace aht::open_ended {

namespace fs = std::filesystem;

namespace {

std::string numbered(const char* prefix, int i) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%s_%04d", prefix, i);
  return buf;
}

void write_json(const fs::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

// Drops diagnostics lines past the last complete iteration.
void truncate_diagnostics(const fs::path& path, int keep) {
  std::ifstream in(path);
  std::vector<std::string> lines;
  for (std::string line; std::getline(in, line);) {
    if (line.empty()) continue;
    if (nlohmann::json::parse(line).value("iteration", 0) <= keep) lines.push_back(line);
  }
  in.close();
  std::ofstream out(path, std::ios::trunc);
  for (const auto& l : lines) out << l << '\n';
}

}  // namespace

void OpenEndedConfig::validate() const {
  if (iterations < 1) throw std::invalid_argument("open_ended: iterations must be >= 1");
  if (ego_updates < 0) throw std::invalid_argument("open_ended: ego_updates must be >= 0");
  if (ego_embed < 1 || ego_hidden < 1 || ego_head < 1) throw std::invalid_argument("open_ended: ego sizes must be >= 1");
  ego.validate();
  teammate.validate();
}

TeammateGenerator regret_generator(const regret::TeammateGenConfig& cfg) {
  return [cfg](Policy& ego, const Environment& env, const Rng& rng) {
    auto res = regret::generate_teammate(ego, env, cfg, rng);
    nlohmann::json d = res.diagnostics.empty() ? nlohmann::json::object() : res.diagnostics.back().to_json();
    d["mode"] = regret::to_string(cfg.mode);
    return GeneratedTeammate{std::move(res.teammate), std::move(d), res.env_steps};
  };
}

std::size_t sample_teammate_index(std::size_t buffer_size, const Rng& round_rng) {
  if (buffer_size == 0) throw std::invalid_argument("ego_update: empty population buffer");
  Rng pick = round_rng.derive("teammate");
  return pick.uniform_index(buffer_size);
}

EgoUpdateStats ego_update(ppo::RecurrentLearner& ego, const PopulationBuffer& buffer, const Environment& env,
                          const OpenEndedConfig& cfg, const Rng& rng, long steps_done) {
  if (buffer.empty()) throw std::invalid_argument("ego_update: empty population buffer");
  EgoUpdateStats st;
  double ret = 0.0;
  for (int r = 0; r < cfg.ego_updates; ++r) {
    const Rng rr = rng.derive("round", static_cast<std::uint64_t>(r));
    const std::size_t idx = sample_teammate_index(buffer.size(), rr);
    auto tm = agents::make_policy(buffer[idx].params);
    agents::RecurrentPolicy actor(ego.net);
    const auto data = rollout(env, actor, *tm, StartSpec::initial(), cfg.ego.num_envs, rr.derive("rollout"),
                              {Mode::XP, false});
    const double lr = cfg.ego.lr_at(steps_done + st.env_steps);
    st.env_steps += static_cast<long>(data.batch.num_transitions());
    Rng train = rr.derive("train");
    auto d = ppo::recurrent_ppo_update(ego, data.batch, 0, cfg.ego, lr, train);
    if (!std::isfinite(d.policy_loss) || !std::isfinite(d.value_loss))
      throw std::runtime_error("ego_update: non-finite loss");
    d.update_idx = r;
    d.mean_return = data.batch.mean_raw_return();
    ret += d.mean_return;
    st.sampled.push_back(idx);
    st.rounds.push_back(d);
  }
  if (cfg.ego_updates > 0) st.mean_return = ret / cfg.ego_updates;
  return st;
}

fs::path ego_checkpoint_path(const fs::path& run_dir, int iteration) {
  return run_dir / "ego" / (numbered("ego", iteration) + ".ckpt");
}

OpenEndedResult open_ended_train(const OpenEndedConfig& cfg, const Environment& env, const Rng& rng,
                                 const std::optional<fs::path>& run_dir, const TeammateGenerator& generator,
                                 const IterationCallback& on_iteration) {
  cfg.validate();
  const auto& desc = env.descriptor();
  const TeammateGenerator gen = generator ? generator : regret_generator(cfg.teammate);
  OpenEndedResult res;
  Rng init = rng.derive("ego_init");
  res.ego = ppo::RecurrentLearner::create(desc.obs_dim, desc.num_actions, cfg.ego_embed, cfg.ego_hidden, cfg.ego_head,
                                          init);
  long ego_steps = 0;

  if (run_dir) {
    fs::create_directories(*run_dir / "teammates");
    fs::create_directories(*run_dir / "ego");
    const fs::path latest = *run_dir / "ego" / "latest.json";
    if (fs::exists(latest)) {
      std::ifstream in(latest);
      const auto j = nlohmann::json::parse(in);
      const int done = j.at("iteration").get<int>();
      if (done > cfg.iterations) throw std::runtime_error("resume: run directory is past the configured iterations");
      const auto stored = PopulationBuffer::load(*run_dir / "teammates");
      if (static_cast<int>(stored.size()) < done) throw std::runtime_error("resume: teammate buffer is incomplete");
      for (int i = 0; i < done; ++i) res.buffer.append(stored[static_cast<std::size_t>(i)]);
      for (int i = 1; i <= done; ++i) res.ego_history.push_back(nn::load_checkpoint(ego_checkpoint_path(*run_dir, i)));
      res.ego.net = res.ego_history.back();
      res.ego.opt = nn::load_adam_state(*run_dir / "ego" / "optimizer.bin");
      res.env_steps = j.at("env_steps").get<long>();
      ego_steps = j.at("ego_steps").get<long>();
      res.resumed_from = done;
      truncate_diagnostics(*run_dir / "diagnostics.jsonl", done);
    } else {
      std::ofstream(*run_dir / "diagnostics.jsonl", std::ios::trunc);
    }
  }

  for (int it = res.resumed_from + 1; it <= cfg.iterations; ++it) {
    const Rng ir = rng.derive("iteration", static_cast<std::uint64_t>(it));
    agents::RecurrentPolicy frozen(res.ego.net);
    GeneratedTeammate g = gen(frozen, env, ir.derive("teammate"));
    res.env_steps += g.env_steps;
    res.buffer.append({std::move(g.params), it, numbered("teammate", it), g.diagnostics});

    if (cfg.reset_ego_optimizer) res.ego.opt = nn::AdamState(res.ego.net.size());
    EgoUpdateStats es;
    if (cfg.population_buffer_enabled) {
      es = ego_update(res.ego, res.buffer, env, cfg, ir.derive("ego"), ego_steps);
    } else {
      PopulationBuffer newest;
      newest.append(res.buffer.back());
      es = ego_update(res.ego, newest, env, cfg, ir.derive("ego"), ego_steps);
      for (auto& s : es.sampled) s = res.buffer.size() - 1;
    }
    ego_steps += es.env_steps;
    res.env_steps += es.env_steps;
    res.ego_history.push_back(res.ego.net);

    nlohmann::json line{{"iteration", it},
                        {"env_steps", res.env_steps},
                        {"buffer_size", res.buffer.size()},
                        {"teammate", res.buffer.back().diagnostics},
                        {"teammate_env_steps", g.env_steps},
                        {"ego", {{"mean_return", es.mean_return}, {"env_steps", es.env_steps}, {"sampled", es.sampled}}}};
    if (!es.rounds.empty()) {
      const auto& last = es.rounds.back();
      line["ego"]["policy_loss"] = last.policy_loss;
      line["ego"]["value_loss"] = last.value_loss;
      line["ego"]["entropy"] = last.entropy;
    }
    res.diagnostics.push_back(line);

    if (run_dir) {
      const auto& m = res.buffer.back();
      regret::save_teammate(*run_dir / "teammates", it, m.params, m.diagnostics);
      res.buffer.save(*run_dir / "teammates");
      nn::save_checkpoint(ego_checkpoint_path(*run_dir, it), res.ego.net);
      nn::save_adam_state(*run_dir / "ego" / "optimizer.bin", res.ego.opt);
      std::ofstream(*run_dir / "diagnostics.jsonl", std::ios::app) << line.dump() << '\n';
      // written last: marks the iteration as complete
      write_json(*run_dir / "ego" / "latest.json",
                 {{"iteration", it}, {"env_steps", res.env_steps}, {"ego_steps", ego_steps}});
    }
    if (on_iteration) on_iteration(line);
  }
  return res;
}

}  // namespace aht::open_ended
