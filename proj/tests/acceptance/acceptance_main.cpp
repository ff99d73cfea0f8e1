// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

#include "aht/agents/policies.hpp"
#include "aht/baselines/baselines.hpp"
#include "aht/cli/commands.hpp"
#include "aht/core/rollout.hpp"
#include "aht/envs/heuristics.hpp"
#include "aht/envs/lbf.hpp"
#include "aht/envs/matrix_game.hpp"
#include "aht/eval/eval.hpp"
#include "aht/nn/backprop.hpp"
#include "aht/nn/checkpoint.hpp"
#include "aht/nn/init.hpp"
#include "aht/ppo/gae.hpp"
#include "aht/ppo/losses.hpp"
#include "aht/regret/teammate_gen.hpp"
#include "../support/chain_env.hpp"
#include "../support/oracles.hpp"

using namespace aht;
namespace fs = std::filesystem;

namespace {

// Tolerances and thresholds.
constexpr double kGaeTol = 1e-10;
constexpr double kGaeSeconds = 5.0;
constexpr double kFdStep = 1e-5;
constexpr double kFdRelTol = 1e-4;
constexpr int kFdBatches = 100;
constexpr long kFdMaxParams = 2000;
constexpr double kFdSeconds = 60.0;
constexpr double kRegretTol = 1e-9;
constexpr long kIppoSteps = 1'000'000;
constexpr double kIppoTarget = 0.40;
constexpr int kIppoWindow = 20;  // trailing updates averaged for the final return
constexpr int kIppoSeedsNeeded = 2;
constexpr double kIppoSeconds = 1800.0;
constexpr double kRegretGap = 0.05;
constexpr int kGapEpisodes = 64;
constexpr int kGenUpdates = 150;
constexpr double kImprovement = 0.10;
constexpr double kRotateSeconds = 4.0 * 3600.0;
constexpr int kEvalEpisodes = 64;
constexpr double kBrdivXpMax = 0.1;
constexpr double kBrdivSpMin = 0.9;
constexpr int kCiFixtures = 100;
const std::vector<std::uint64_t> kRunSeeds = {1, 2, 3};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

int failures = 0;

void verdict(int id, const std::string& name, bool pass, const std::string& detail) {
  if (!pass) ++failures;
  std::printf("[%s] %2d %s: %s\n", pass ? "PASS" : "FAIL", id, name.c_str(), detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

fs::path config_path(const std::string& name) { return fs::path(AHT_SOURCE_DIR) / "configs" / name; }

fs::path scratch_dir(const std::string& name) {
  const fs::path d = fs::path(AHT_BINARY_DIR) / "acceptance_runs" / name;
  fs::remove_all(d);
  return d;
}

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

nn::ParamSet random_params(const nn::ShapeDescriptor& shape, Rng& rng, double scale) {
  nn::ParamSet p(shape);
  for (Eigen::Index i = 0; i < p.size(); ++i) p.flat()[i] = scale * rng.normal();
  return p;
}

Matrix random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.normal();
  return m;
}

eval::EvalSuite heuristic_suite() {
  eval::EvalSuite s;
  for (const auto& h : envs::lbf_heuristics()) {
    eval::EvalTeammate t;
    t.name = h.name();
    t.heuristic = h;
    t.upper_bound = 0.5;
    s.push_back(t);
  }
  return s;
}

double heuristic_score(const nn::ParamSet& ego, const Environment& env) {
  eval::EvalOptions opts;
  opts.episodes = kEvalEpisodes;
  opts.bootstrap_resamples = 0;
  return eval::evaluate_ego(ego, heuristic_suite(), env, opts).normalized_mean;
}

// ---------------------------------------------------------------------------

void criterion_gae() {
  const auto t0 = Clock::now();
  Rng rng(101);
  double worst = 0.0, worst_mc = 0.0;
  for (int ep = 0; ep < 1000; ++ep) {
    const auto len = 1 + rng.uniform_index(20);
    std::vector<double> r(len), v(len);
    std::vector<std::uint8_t> done(len, 0);
    for (std::size_t t = 0; t < len; ++t) {
      r[t] = rng.normal();
      v[t] = rng.normal();
    }
    done.back() = 1;
    for (double lambda : {0.0, 0.5, 0.95, 1.0}) {
      const auto a = ppo::gae(r, v, 0.0, done, 0.99, lambda);
      const auto ref = oracle::gae_double_sum(r, v, 0.0, done, 0.99, lambda);
      for (std::size_t t = 0; t < len; ++t) worst = std::max(worst, std::abs(a.advantages[t] - ref[t]));
      if (lambda == 1.0)
        for (std::size_t t = 0; t < len; ++t)
          worst_mc = std::max(worst_mc, std::abs(a.advantages[t] - (oracle::discounted_sum(r, t, 0.99) - v[t])));
    }
  }
  const double secs = seconds_since(t0);
  verdict(1, "GAE oracle", worst <= kGaeTol && worst_mc <= kGaeTol && secs < kGaeSeconds,
          fmt("max |A - double sum| %.2e, lambda=1 max |A - (G - V)| %.2e, tol %.0e, %.2fs (limit %.0fs)", worst,
              worst_mc, kGaeTol, secs, kGaeSeconds));
}

void criterion_gradients() {
  const auto t0 = Clock::now();
  envs::LbfEnv env;
  const int obs = env.descriptor().obs_dim, actions = env.descriptor().num_actions;
  const auto actor_shape = nn::ShapeDescriptor::mlp(obs, {8, 8}, actions);
  const auto critic_shape = nn::ShapeDescriptor::mlp(obs, {8, 8}, 1);
  Rng rng(202);
  double worst_pol = 0.0, worst_val = 0.0, worst_reg = 0.0;
  long max_params = 0;

  for (int b = 0; b < kFdBatches; ++b) {
    // policy loss
    {
      const auto old = random_params(actor_shape, rng, 0.3);
      auto cur = old;
      for (Eigen::Index i = 0; i < cur.size(); ++i) cur.flat()[i] += 0.1 * rng.normal();
      const int n = 32;
      ppo::AdvantageBatch batch;
      batch.obs = random_matrix(obs, n, rng);
      for (int j = 0; j < n; ++j) batch.actions.push_back(static_cast<int>(rng.uniform_index(actions)));
      batch.advantages = Vector::NullaryExpr(n, [&] { return rng.normal(); });
      batch.old_log_probs = ppo::action_log_probs(old, batch.obs, batch.actions);
      auto f = [&](const Eigen::VectorXd& x) {
        auto q = cur;
        q.flat() = x;
        return ppo::ppo_clip_policy_loss(q, old, batch, 0.2, 0.01);
      };
      Vector adv = batch.advantages;
      ppo::normalize(adv);
      const auto g = nn::backprop(cur, batch.obs, [&](const Matrix& logits) {
        return ppo::ppo_clip_logits_loss(logits, batch.actions, adv, batch.old_log_probs, 0.2, 0.01, 1.0, "policy");
      });
      worst_pol = std::max(worst_pol, oracle::relative_error(g.grad, oracle::central_diff(f, cur.flat(), kFdStep)));
      max_params = std::max<long>(max_params, cur.size());
    }
    // value loss
    {
      const auto critic = random_params(critic_shape, rng, 0.3);
      const int n = 32;
      ppo::AdvantageBatch batch;
      batch.obs = random_matrix(obs, n, rng);
      batch.value_targets = Vector::NullaryExpr(n, [&] { return rng.normal(); });
      auto f = [&](const Eigen::VectorXd& x) {
        auto q = critic;
        q.flat() = x;
        return ppo::value_loss(q, critic, batch);
      };
      const auto g = nn::backprop(critic, batch.obs, [&](const Matrix& values) {
        return ppo::value_output_loss(values, batch.value_targets, 1.0, "value");
      });
      worst_val = std::max(worst_val, oracle::relative_error(g.grad, oracle::central_diff(f, critic.flat(), kFdStep)));
      max_params = std::max<long>(max_params, critic.size());
    }
    // regret-target teammate loss on real interaction data
    {
      Rng sr = rng.derive("state", static_cast<std::uint64_t>(b));
      auto state = regret::TeammateGenState::create(env.descriptor(), 8, regret::RegretMode::per_state, sr);
      agents::UniformPolicy ego;
      const auto in = regret::collect_interactions(state, ego, env, {2, 2, 2, 0}, sr.derive("collect"));
      regret::TeammateGenConfig cfg;
      const auto terms = regret::teammate_policy_terms(state, {&in.sp, &in.xp, &in.sxp, nullptr},
                                                       regret::RegretMode::per_state, cfg);
      auto cur = state.teammate;
      for (Eigen::Index i = 0; i < cur.size(); ++i) cur.flat()[i] += 0.05 * sr.normal();
      auto f = [&](const Eigen::VectorXd& x) {
        auto q = cur;
        q.flat() = x;
        return regret::teammate_policy_loss(q, terms, cfg);
      };
      Vector grad = Vector::Zero(cur.size());
      for (std::size_t i = 0; i < terms.batches.size(); ++i) {
        const auto& tb = terms.batches[i];
        if (tb.size() == 0) continue;
        Vector adv = tb.advantages;
        if (terms.normalize[i]) ppo::normalize(adv);
        grad += nn::backprop(cur, tb.obs, [&](const Matrix& logits) {
                  return ppo::ppo_clip_logits_loss(logits, tb.actions, adv, tb.old_log_probs, cfg.ppo.clip_eps,
                                                   cfg.ppo.ent_coef, terms.weights[i], terms.names[i]);
                }).grad;
      }
      worst_reg = std::max(worst_reg, oracle::relative_error(grad, oracle::central_diff(f, cur.flat(), kFdStep)));
      max_params = std::max<long>(max_params, cur.size());
    }
  }
  const double secs = seconds_since(t0);
  const bool pass = worst_pol <= kFdRelTol && worst_val <= kFdRelTol && worst_reg <= kFdRelTol &&
                    max_params <= kFdMaxParams && secs < kFdSeconds;
  verdict(2, "gradient exactness", pass,
          fmt("%d batches, max rel err policy %.2e value %.2e regret %.2e (tol %.0e, h %.0e), %ld params, %.1fs",
              kFdBatches, worst_pol, worst_val, worst_reg, kFdRelTol, kFdStep, max_params, secs));
}

void criterion_zero_regret() {
  const oracle::Chain chain{3, -0.1, 1.0};
  const double gamma = 0.9;
  testenv::ChainEnv env(chain, gamma);
  const auto v = oracle::value_iteration(chain, gamma);
  nn::ParamSet critic(nn::ShapeDescriptor::mlp(chain.n, {}, 1));
  for (int s = 0; s < chain.n; ++s) critic.block(0)(0, s) = v[static_cast<std::size_t>(s)];
  agents::FixedActionPolicy optimal(1);
  const auto xp = rollout(env, optimal, optimal, StartSpec::initial(), 8, Rng(303), {Mode::XP, false}).batch;
  const Vector a = regret::regret_targets(critic, critic, xp, gamma);
  const double worst = a.size() ? a.cwiseAbs().maxCoeff() : 1.0;
  verdict(3, "zero-regret identity", a.size() > 0 && worst <= kRegretTol,
          fmt("%ld XP transitions, max |A_reg| %.2e (tol %.0e)", static_cast<long>(a.size()), worst, kRegretTol));
}

void criterion_ippo() {
  const auto t0 = Clock::now();
  auto cfg = cli::load_config(config_path("lbf_ippo.toml"));
  cfg.finalize();
  cfg.ippo.ppo.total_timesteps = kIppoSteps;
  envs::LbfEnv env(cfg.lbf);
  int passed = 0;
  std::string detail;
  for (std::uint64_t seed : {0, 1, 2}) {
    const auto res = baselines::ippo_train(env, cfg.ippo, Rng(seed));
    const auto& c = res.curve;
    const std::size_t k = std::min<std::size_t>(kIppoWindow, c.size());
    double mean = 0.0;
    for (std::size_t i = c.size() - k; i < c.size(); ++i) mean += c[i].mean_return;
    mean /= static_cast<double>(k);
    if (mean >= kIppoTarget) ++passed;
    detail += fmt("seed %llu %.3f; ", static_cast<unsigned long long>(seed), mean);
  }
  const double secs = seconds_since(t0);
  verdict(4, "IPPO on LBF", passed >= kIppoSeedsNeeded && secs <= kIppoSeconds,
          detail + fmt("%d/3 >= %.2f within %ld steps (need %d), %.0fs", passed, kIppoTarget, kIppoSteps,
                       kIppoSeedsNeeded, secs));
}

void criterion_regret_gap() {
  const auto cfg = cli::load_config(config_path("lbf_rotate.toml"));
  envs::LbfEnv env(cfg.lbf);
  const Rng rng(1);
  Rng er = rng.derive("ego");
  const auto& oe = cfg.open_ended;
  const auto ego_params = nn::init_params<double>(
      nn::ShapeDescriptor::recurrent(env.descriptor().obs_dim, env.descriptor().num_actions, oe.ego_embed,
                                     oe.ego_hidden, oe.ego_head),
      true, er);
  agents::RecurrentPolicy ego(ego_params);
  auto gen = oe.teammate;
  gen.mode = regret::RegretMode::per_state;
  gen.updates = kGenUpdates;
  const auto res = regret::generate_teammate(ego, env, gen, rng.derive("gen"));
  agents::MlpPolicy teammate(res.teammate), br(res.state.br);
  const Rng eval_rng(404);
  const double sp = rollout(env, br, teammate, StartSpec::initial(), kGapEpisodes, eval_rng).batch.mean_raw_return();
  const double xp = rollout(env, ego, teammate, StartSpec::initial(), kGapEpisodes, eval_rng).batch.mean_raw_return();
  verdict(5, "positive generated regret", sp - xp > kRegretGap,
          fmt("SP %.3f - XP %.3f = %.3f over %d episodes (need > %.2f)", sp, xp, sp - xp, kGapEpisodes, kRegretGap));
}

struct RunScores {
  double first = 0.0;
  double final = 0.0;
  long env_steps = 0;
  double secs = 0.0;
};

RunScores train_and_score(const std::string& config, std::uint64_t seed) {
  const auto t0 = Clock::now();
  auto cfg = cli::load_config(config_path(config));
  cfg.seed = seed;
  const auto dir = scratch_dir(cfg.algorithm + "_s" + std::to_string(seed));
  cfg.out_dir = dir.string();
  std::ostringstream log;
  const auto final_ckpt = cli::train(cfg, log);
  cfg.finalize();
  const auto env = cli::make_env(cfg);
  RunScores s;
  s.first = heuristic_score(nn::load_checkpoint(open_ended::ego_checkpoint_path(dir, 1)), *env);
  s.final = heuristic_score(nn::load_checkpoint(final_ckpt), *env);
  std::ifstream latest(dir / "ego" / "latest.json");
  s.env_steps = nlohmann::json::parse(latest).at("env_steps").get<long>();
  s.secs = seconds_since(t0);
  std::printf("       %s seed %llu: iteration-1 %.3f final %.3f, %ld env steps, %.0fs\n", cfg.algorithm.c_str(),
              static_cast<unsigned long long>(seed), s.first, s.final, s.env_steps, s.secs);
  std::fflush(stdout);
  return s;
}

void criteria_open_ended(const std::set<int>& which) {
  const bool need_traj = which.count(8) > 0, need_minimax = which.count(7) > 0;
  std::vector<RunScores> rotate, traj, minimax;
  const std::size_t rotate_seeds = need_traj || need_minimax ? kRunSeeds.size() : 1;
  for (std::size_t i = 0; i < rotate_seeds; ++i) rotate.push_back(train_and_score("lbf_rotate.toml", kRunSeeds[i]));

  if (which.count(6)) {
    const auto& r = rotate.front();
    verdict(6, "open-ended improvement", r.final - r.first >= kImprovement && r.secs <= kRotateSeconds,
            fmt("seed %llu: final %.3f - iteration-1 %.3f = %+.3f (need >= %.2f), %.0fs",
                static_cast<unsigned long long>(kRunSeeds.front()), r.final, r.first, r.final - r.first,
                kImprovement, r.secs));
  }
  if (need_minimax) {
    int wins = 0;
    std::string detail;
    for (std::size_t i = 0; i < kRunSeeds.size(); ++i) {
      minimax.push_back(train_and_score("lbf_minimax.toml", kRunSeeds[i]));
      if (rotate[i].final >= minimax[i].final) ++wins;
      detail += fmt("seed %llu %.3f vs %.3f (%ld vs %ld steps); ", static_cast<unsigned long long>(kRunSeeds[i]),
                    rotate[i].final, minimax[i].final, rotate[i].env_steps, minimax[i].env_steps);
    }
    verdict(7, "ROTATE >= minimax return", wins == static_cast<int>(kRunSeeds.size()),
            detail + fmt("%d/3 seeds (need 3)", wins));
  }
  if (need_traj) {
    int wins = 0;
    std::string detail;
    for (std::size_t i = 0; i < kRunSeeds.size(); ++i) {
      traj.push_back(train_and_score("lbf_rotate_traj.toml", kRunSeeds[i]));
      if (rotate[i].final >= traj[i].final) ++wins;
      detail += fmt("seed %llu %.3f vs %.3f (%ld vs %ld steps); ", static_cast<unsigned long long>(kRunSeeds[i]),
                    rotate[i].final, traj[i].final, rotate[i].env_steps, traj[i].env_steps);
    }
    verdict(8, "per-state >= per-trajectory", wins >= 2, detail + fmt("%d/3 seeds (need 2)", wins));
  }
}

void criterion_brdiv() {
  auto cfg = cli::load_config(config_path("coordination_brdiv.toml"));
  cfg.finalize();
  const auto game = envs::MatrixGameEnv::coordination();
  const auto res = baselines::brdiv_train(game, cfg.brdiv, Rng(cfg.seed));
  // Exact expected returns from the policies' action distributions.
  Rng r(0);
  auto env = game.clone();
  env->reset(r);
  Matrix obs(game.descriptor().obs_dim, 1);
  env->observe(1, std::span<Real>(obs.data(), static_cast<std::size_t>(obs.size())));
  const int n = cfg.brdiv.n, na = game.descriptor().num_actions;
  double sp_min = 1e9, xp_max = -1e9;
  for (int i = 0; i < n; ++i) {
    const Matrix pc = nn::softmax(nn::actor_forward(res.confederates[static_cast<std::size_t>(i)].params, obs));
    for (int j = 0; j < n; ++j) {
      const Matrix pb = nn::softmax(nn::actor_forward(res.best_responses[static_cast<std::size_t>(j)], obs));
      double e = 0.0;
      for (int a = 0; a < na; ++a)
        for (int b = 0; b < na; ++b) e += pb(a, 0) * pc(b, 0) * game.payoff(a, b);
      if (i == j) {
        sp_min = std::min(sp_min, e);
      } else {
        xp_max = std::max(xp_max, e);
      }
    }
  }
  verdict(9, "BRDiv on the 2x2 convention game", sp_min >= kBrdivSpMin && xp_max <= kBrdivXpMax,
          fmt("min SP %.3f (need >= %.1f), max XP %.3f (need <= %.1f), exact expectation over both policies",
              sp_min, kBrdivSpMin, xp_max, kBrdivXpMax));
}

int cli_call(const std::string& args) {
  const std::string cmd = std::string("\"") + AHT_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void criterion_determinism() {
  const auto root = scratch_dir("determinism");
  fs::create_directories(root);
  const std::string tiny =
      " --set env=lbf --set algorithm=rotate --set open_ended.iterations=2 --set open_ended.ego_updates=2"
      " --set ego.num_envs=4 --set ego.embed=16 --set ego.hidden=16 --set ego.head=16 --set teammate.updates=2"
      " --set teammate.hidden=16 --set teammate.sp_episodes=2 --set teammate.xp_episodes=2"
      " --set teammate.sxp_episodes=2 --set teammate.mp_episodes=2 --seed 7";
  const std::string suite_args =
      " --set suite.ippo_seeds=1 --set suite.brdiv_n=2 --set ippo.hidden=8 --set ippo.total_timesteps=400"
      " --set brdiv.hidden=8 --set brdiv.updates=1 --set brdiv.episodes_per_pair=1 --set br.hidden=8"
      " --set br.total_timesteps=400 --set br.episodes=4";
  const auto a = root / "a", b = root / "b", suite = root / "suite";
  int rc = 0;
  rc |= cli_call("train" + tiny + " --out " + a.string());
  rc |= cli_call("train" + tiny + " --out " + b.string());
  rc |= cli_call("suite --env lbf --seed 3" + suite_args + " --out " + suite.string());
  const auto ckpt = a / "ego" / "final.ckpt";
  rc |= cli_call("eval --ckpt " + ckpt.string() + " --suite " + suite.string() + " --episodes 8 --out " +
                 (root / "e1").string());
  rc |= cli_call("eval --ckpt " + ckpt.string() + " --suite " + suite.string() + " --episodes 8 --out " +
                 (root / "e2").string());
  const std::string ca = read_bytes(a / "ego" / "final.ckpt"), cb = read_bytes(b / "ego" / "final.ckpt");
  const std::string ra = read_bytes(root / "e1" / "report.json"), rb = read_bytes(root / "e2" / "report.json");
  const bool same_ckpt = !ca.empty() && ca == cb;
  const bool same_report = !ra.empty() && ra == rb;
  verdict(10, "determinism through the CLI", rc == 0 && same_ckpt && same_report,
          fmt("exit codes %s, final checkpoints %s (%zu bytes), report.json %s (%zu bytes)", rc == 0 ? "ok" : "FAILED",
              same_ckpt ? "identical" : "DIFFER", ca.size(), same_report ? "identical" : "DIFFER", ra.size()));
}

void criterion_metrics() {
  eval::EvalReport r;
  r.teammates = {{"a", eval::TeammateKind::heuristic, 0.5, 0, 0, 0, 0, {0.5, 0.0, 0.25, 0.25}},
                 {"b", eval::TeammateKind::ippo, 2.0, 0, 0, 0, 0, {1.0, 3.0}},
                 {"c", eval::TeammateKind::brdiv, 0.25, 0, 0, 0, 0, {-0.5, 1.0}},
                 {"d", eval::TeammateKind::ippo, 1.0, 0, 0, 0, 0, {-0.25, 0.0}}};
  eval::aggregate(r, 1000, Rng(1));
  // hand: a 0.25 / 0.5; b 2 / 2; c 0.25 / 0.25; d mean -0.125 clamps to 0
  const double hand = (0.5 + 1.0 + 1.0 + 0.0) / 4.0;
  const bool exact = r.normalized_mean == hand;
  Rng rng(505);
  int contained = 0;
  for (int f = 0; f < kCiFixtures; ++f) {
    eval::EvalReport x;
    const auto k = 1 + rng.uniform_index(8);
    for (std::size_t i = 0; i < k; ++i) {
      eval::TeammateResult t;
      t.name = "t" + std::to_string(i);
      t.upper_bound = 0.05 + rng.uniform();
      const auto n = 1 + rng.uniform_index(64);
      for (std::size_t e = 0; e < n; ++e) t.returns.push_back(rng.uniform() < 0.4 ? 0.0 : 1.5 * rng.uniform());
      x.teammates.push_back(t);
    }
    eval::aggregate(x, 2000, rng.derive("bootstrap", static_cast<std::uint64_t>(f)));
    if (x.ci_low <= x.normalized_mean && x.normalized_mean <= x.ci_high) ++contained;
  }
  verdict(11, "metric pipeline", exact && contained == kCiFixtures,
          fmt("fixture aggregate %.17g vs hand %.17g (%s), CI contains estimate on %d/%d random fixtures",
              r.normalized_mean, hand, exact ? "exact" : "MISMATCH", contained, kCiFixtures));
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> which;
  for (int i = 1; i < argc; ++i) which.insert(std::atoi(argv[i]));
  if (which.empty())
    for (int i = 1; i <= 11; ++i) which.insert(i);
  const auto t0 = Clock::now();
  try {
    if (which.count(1)) criterion_gae();
    if (which.count(2)) criterion_gradients();
    if (which.count(3)) criterion_zero_regret();
    if (which.count(11)) criterion_metrics();
    if (which.count(9)) criterion_brdiv();
    if (which.count(10)) criterion_determinism();
    if (which.count(5)) criterion_regret_gap();
    if (which.count(4)) criterion_ippo();
    if (which.count(6) || which.count(7) || which.count(8)) criteria_open_ended(which);
  } catch (const std::exception& e) {
    std::printf("[FAIL] aborted: %s\n", e.what());
    return 1;
  }
  std::printf("%d criteria run, %d failed, %.0fs total\n", static_cast<int>(which.size()), failures,
              seconds_since(t0));
  return failures == 0 ? 0 : 1;
}
