#include <fstream>

#include "aht/agents/policies.hpp"
#include "aht/baselines/baselines.hpp"
#include "aht/core/rollout.hpp"
#include "aht/envs/heuristics.hpp"
#include "aht/envs/lbf.hpp"
#include "aht/envs/matrix_game.hpp"
#include "doctest.h"

using namespace aht;
using namespace aht::baselines;

namespace {

IppoConfig tiny_ippo(long steps) {
  IppoConfig c;
  c.hidden = 8;
  c.ppo.total_timesteps = steps;
  c.ppo.num_envs = 2;
  c.ppo.epochs = 1;
  return c;
}

}  // namespace

TEST_CASE("ippo: seeds differ, runs repeat") {
  envs::LbfEnv env;
  const auto cfg = tiny_ippo(500);
  const auto a = ippo_selfplay(env, cfg, Rng(1));
  const auto b = ippo_selfplay(env, cfg, Rng(1));
  const auto c = ippo_selfplay(env, cfg, Rng(2));
  CHECK(a == b);
  CHECK_FALSE(a == c);
  const auto res = ippo_train(env, cfg, Rng(1));
  CHECK(res.agent1.actor == a);
  CHECK_FALSE(res.agent0.actor == res.agent1.actor);
  CHECK(res.env_steps >= 500);
  CHECK(res.curve.back().env_steps == res.env_steps);
}

TEST_CASE("fcp: population size and checkpoint order") {
  envs::LbfEnv env;
  const auto pop = fcp_population(env, 4, 3, tiny_ippo(600), Rng(3));
  CHECK(pop.size() == 12);
  for (std::size_t s = 0; s < 4; ++s) {
    long prev = 0;
    for (std::size_t c = 0; c < 3; ++c) {
      const auto& m = pop[s * 3 + c];
      CHECK(m.diagnostics["seed"] == static_cast<int>(s));
      const long upd = m.diagnostics["update"].get<long>();
      CHECK(upd > prev);
      prev = upd;
    }
  }
  CHECK_THROWS(fcp_population(env, 0, 3, tiny_ippo(100), Rng(3)));
}

TEST_CASE("fcp: final checkpoint equals the seed's final IPPO actor") {
  envs::LbfEnv env;
  const auto cfg = tiny_ippo(400);
  const Rng rng(4);
  const auto pop = fcp_population(env, 1, 2, cfg, rng);
  CHECK(pop.back().params == ippo_selfplay(env, cfg, rng.derive("seed", 0)));
}

TEST_CASE("minimax: XP return against a no-op ego is zero and training repeats") {
  envs::LbfEnv env;
  agents::FixedActionPolicy noop(envs::kLbfNoop);
  MinimaxConfig cfg;
  cfg.hidden = 8;
  cfg.updates = 3;
  cfg.ppo.num_envs = 2;
  cfg.ppo.epochs = 1;
  long steps = 0;
  const auto a = minimax_teammate(noop, env, cfg, Rng(5), &steps);
  const auto b = minimax_teammate(noop, env, cfg, Rng(5));
  CHECK(a == b);
  CHECK(steps > 0);
  agents::MlpPolicy tm(a);
  CHECK(rollout(env, noop, tm, StartSpec::initial(), 16, Rng(6)).batch.mean_raw_return() == 0.0);
}

TEST_CASE("minimax: learned teammate does no better with its ego than a fresh one") {
  envs::LbfEnv env;
  envs::HeuristicPolicy ego({envs::HeuristicKind::seq_nearest});
  MinimaxConfig cfg;
  cfg.hidden = 16;
  cfg.updates = 15;
  cfg.ppo.num_envs = 16;
  cfg.ppo.lr = 1e-3;
  const auto trained = minimax_teammate(ego, env, cfg, Rng(7));
  cfg.updates = 0;
  const auto fresh = minimax_teammate(ego, env, cfg, Rng(7));
  agents::MlpPolicy t(trained), f(fresh);
  const double rt = rollout(env, ego, t, StartSpec::initial(), 64, Rng(8)).batch.mean_raw_return();
  const double rf = rollout(env, ego, f, StartSpec::initial(), 64, Rng(8)).batch.mean_raw_return();
  CHECK(rt <= rf);
}

TEST_CASE("brdiv: n^2 pairings, matrix shape, anti-aligned conventions") {
  auto env = envs::MatrixGameEnv::coordination();
  BrdivConfig cfg;
  cfg.hidden = 16;
  cfg.updates = 120;
  cfg.episodes_per_pair = 32;
  cfg.ppo.lr = 3e-3;
  const auto res = brdiv_train(env, cfg, Rng(9));
  CHECK(res.pairings_per_update == 4);
  CHECK(res.xp_matrix.rows() == 2);
  CHECK(res.xp_matrix.cols() == 2);
  CHECK(res.confederates.size() == 2);
  CHECK(res.best_responses.size() == 2);
  CHECK(res.xp_matrix(0, 0) >= 0.9);
  CHECK(res.xp_matrix(1, 1) >= 0.9);
  CHECK(res.xp_matrix(0, 1) <= 0.1);
  CHECK(res.xp_matrix(1, 0) <= 0.1);

  cfg.n = 3;
  cfg.updates = 1;
  cfg.xp_weight = 0.0;
  const auto three = brdiv_train(env, cfg, Rng(10));
  CHECK(three.pairings_per_update == 9);
  CHECK(three.xp_matrix.rows() == 3);
  cfg.n = 1;
  CHECK_THROWS(brdiv_train(env, cfg, Rng(10)));
}

TEST_CASE("manifest lists every member") {
  auto env = envs::MatrixGameEnv::coordination();
  BrdivConfig cfg;
  cfg.hidden = 4;
  cfg.updates = 1;
  const auto pop = brdiv_population(env, cfg, Rng(11));
  const auto dir = std::filesystem::temp_directory_path() / "aht_manifest_test";
  std::filesystem::remove_all(dir);
  write_manifest(dir, pop, "brdiv", {{"seed", 11}});
  std::ifstream in(dir / "manifest.json");
  const auto j = nlohmann::json::parse(in);
  CHECK(j["algorithm"] == "brdiv");
  CHECK(j["members"].size() == 2);
  for (const auto& m : j["members"]) CHECK(std::filesystem::exists(dir / m["file"].get<std::string>()));
  std::filesystem::remove_all(dir);
}
