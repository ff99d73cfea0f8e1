#include <fstream>
#include <set>

#include "aht/agents/policies.hpp"
#include "aht/envs/lbf.hpp"
#include "aht/envs/matrix_game.hpp"
#include "aht/envs/overcooked.hpp"
#include "aht/eval/eval.hpp"
#include "aht/nn/init.hpp"
#include "doctest.h"

using namespace aht;
using namespace aht::eval;

namespace {

EvalReport fixture(Rng& rng, std::size_t teammates, std::size_t episodes) {
  EvalReport r;
  for (std::size_t i = 0; i < teammates; ++i) {
    TeammateResult t;
    t.name = "t" + std::to_string(i);
    t.upper_bound = 0.1 + rng.uniform();
    for (std::size_t e = 0; e < episodes; ++e) t.returns.push_back(rng.uniform() < 0.3 ? 0.0 : rng.uniform());
    r.teammates.push_back(t);
  }
  return r;
}

// An actor that plays `action` with near certainty.
nn::ParamSet committed_actor(int actions, int action) {
  nn::ParamSet p(nn::ShapeDescriptor::mlp(1, {}, actions));
  p.block(1)(action, 0) = 20.0;
  return p;
}

EvalSuite heuristic_suite() {
  EvalSuite s;
  for (const auto& h : envs::lbf_heuristics()) {
    EvalTeammate t;
    t.name = h.name();
    t.heuristic = h;
    t.upper_bound = 0.5;
    s.push_back(t);
  }
  return s;
}

}  // namespace

TEST_CASE("aggregate: mean of per-teammate normalized means") {
  EvalReport r;
  r.teammates = {{"a", TeammateKind::heuristic, 0.5, 0, 0, 0, 0, {0.5, 0.0, 0.25, 0.25}},
                 {"b", TeammateKind::ippo, 2.0, 0, 0, 0, 0, {1.0, 3.0}}};
  aggregate(r, 1000, Rng(1));
  CHECK(r.teammates[0].raw_mean == 0.25);
  CHECK(r.teammates[0].normalized_mean == 0.5);
  CHECK(r.teammates[1].normalized_mean == 1.0);
  CHECK(r.normalized_mean == 0.75);
  CHECK(r.ci_low <= r.normalized_mean);
  CHECK(r.normalized_mean <= r.ci_high);
}

TEST_CASE("aggregate: bootstrap CI contains the estimate and narrows with more episodes") {
  Rng rng(2);
  double narrow = 0.0, wide = 0.0;
  for (int f = 0; f < 20; ++f) {
    auto small = fixture(rng, 4, 16);
    auto large = fixture(rng, 4, 256);
    aggregate(small, 2000, rng.derive("b", f));
    aggregate(large, 2000, rng.derive("c", f));
    for (const auto* r : {&small, &large}) {
      CHECK(r->ci_low <= r->normalized_mean);
      CHECK(r->normalized_mean <= r->ci_high);
      for (const auto& t : r->teammates) {
        CHECK(t.ci_low <= t.normalized_mean);
        CHECK(t.normalized_mean <= t.ci_high);
        CHECK(t.normalized_mean >= 0.0);
      }
    }
    wide += small.ci_high - small.ci_low;
    narrow += large.ci_high - large.ci_low;
  }
  CHECK(narrow < wide);
}

TEST_CASE("normalization is monotone and unclipped above one") {
  EvalReport r;
  r.teammates = {{"a", TeammateKind::heuristic, 0.5, 0, 0, 0, 0, {0.2}}};
  aggregate(r, 0, Rng(0));
  const double low = r.normalized_mean;
  r.teammates[0].returns = {0.75};
  aggregate(r, 0, Rng(0));
  CHECK(r.normalized_mean > low);
  CHECK(r.normalized_mean == 1.5);
}

TEST_CASE("emit_report: CSV rows and lossless JSON") {
  Rng rng(3);
  auto r = fixture(rng, 3, 8);
  r.seed = 5;
  r.episodes = 8;
  r.checkpoint = "ego_0001.ckpt";
  r.env = "lbf";
  aggregate(r, 500, Rng(4));
  const auto dir = std::filesystem::temp_directory_path() / "aht_report_test";
  std::filesystem::remove_all(dir);
  emit_report(r, dir);
  std::ifstream csv(dir / "per_teammate.csv");
  std::string header;
  std::getline(csv, header);
  CHECK(header == "name,kind,raw_mean,normalized_mean,ci_low,ci_high");
  int rows = 0;
  for (std::string l; std::getline(csv, l);) ++rows;
  CHECK(rows == 3);
  std::ifstream js(dir / "report.json");
  const auto j = nlohmann::json::parse(js);
  CHECK(j["schema"] == 1);
  const auto back = EvalReport::from_json(j);
  CHECK(back.to_json() == r.to_json());
  CHECK(back.normalized_mean == r.normalized_mean);
  std::filesystem::remove_all(dir);
}

TEST_CASE("estimate_upper_bound: no-op teammate hits the floor") {
  envs::LbfEnv env;
  agents::FixedActionPolicy noop(envs::kLbfNoop);
  BrConfig cfg;
  cfg.hidden = 8;
  cfg.ppo.total_timesteps = 2000;
  cfg.ppo.num_envs = 4;
  cfg.episodes = 8;
  CHECK(estimate_upper_bound(noop, env, cfg, Rng(5)) == kUpperBoundFloor);
}

TEST_CASE("evaluate_ego: BR of the only teammate normalizes to about one") {
  auto env = envs::MatrixGameEnv::coordination();
  EvalTeammate t;
  t.name = "committed";
  t.kind = TeammateKind::ippo;
  t.params = committed_actor(2, 1);
  BrConfig cfg;
  cfg.hidden = 8;
  cfg.ppo.total_timesteps = 3000;
  cfg.ppo.lr = 3e-3;
  auto tm = t.make_policy();
  t.upper_bound = estimate_upper_bound(*tm, env, cfg, Rng(6));
  CHECK(t.upper_bound == doctest::Approx(1.0).epsilon(0.05));
  EvalOptions opts;
  opts.bootstrap_resamples = 1000;
  const auto rep = evaluate_ego(committed_actor(2, 1), {t}, env, opts);
  CHECK(std::abs(rep.normalized_mean - 1.0) <= 0.1);
  opts.greedy = true;
  CHECK(evaluate_ego(committed_actor(2, 1), {t}, env, opts).teammates[0].raw_mean == 1.0);
}

TEST_CASE("evaluate_ego: random recurrent ego on the heuristic suite scores low, deterministically") {
  envs::LbfEnv env;
  Rng r(7);
  const auto ego = nn::init_params<double>(nn::ShapeDescriptor::recurrent(14, 6, 16, 16, 16), true, r);
  EvalOptions opts;
  opts.episodes = 16;
  opts.bootstrap_resamples = 200;
  const auto suite = heuristic_suite();
  const auto a = evaluate_ego(ego, suite, env, opts);
  const auto b = evaluate_ego(ego, suite, env, opts);
  CHECK(a.to_json() == b.to_json());
  CHECK(a.teammates.size() == 6);
  CHECK(a.normalized_mean < 0.35);
  CHECK_THROWS(evaluate_ego(ego, {}, env, opts));
}

TEST_CASE("build_eval_suite: LBF membership, disjoint seeds, persistence") {
  envs::LbfEnv env;
  SuiteConfig cfg;
  cfg.ippo.hidden = 8;
  cfg.ippo.ppo.total_timesteps = 300;
  cfg.ippo.ppo.num_envs = 2;
  cfg.brdiv.hidden = 8;
  cfg.brdiv.updates = 1;
  cfg.brdiv.episodes_per_pair = 1;
  cfg.br.hidden = 8;
  cfg.br.ppo.total_timesteps = 300;
  cfg.br.ppo.num_envs = 2;
  cfg.br.episodes = 4;
  const auto suite = build_eval_suite(env, cfg, Rng(8));
  REQUIRE(suite.size() == 10);
  std::set<std::string> names;
  for (const auto& t : suite) {
    names.insert(t.name);
    CHECK(t.upper_bound > t.lower_bound);
    if (t.kind == TeammateKind::heuristic) {
      CHECK(t.upper_bound == 0.5);
    } else {
      CHECK(t.seed >= kEvalSeedBase);
    }
  }
  for (const char* h : {"seq_col", "seq_rcol", "seq_lexi", "seq_rlexi", "seq_nearest", "seq_farthest"})
    CHECK(names.count(h) == 1);
  const auto dir = std::filesystem::temp_directory_path() / "aht_suite_test";
  std::filesystem::remove_all(dir);
  save_suite(dir, suite, "lbf");
  std::string env_name;
  const auto back = load_suite(dir, &env_name);
  CHECK(env_name == "lbf");
  REQUIRE(back.size() == suite.size());
  CHECK(*back[7].params == *suite[7].params);
  CHECK(back[0].heuristic->kind == envs::HeuristicKind::seq_col);
  std::filesystem::remove_all(dir);

  auto game = envs::MatrixGameEnv::coordination();
  CHECK_THROWS(build_eval_suite(game, cfg, Rng(8)));
}
