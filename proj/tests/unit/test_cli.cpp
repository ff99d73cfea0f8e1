#include <fstream>
#include <set>
#include <sstream>

#include "aht/cli/commands.hpp"
#include "aht/cli/config.hpp"
#include "aht/nn/checkpoint.hpp"
#include "doctest.h"

using namespace aht;
using namespace aht::cli;
namespace fs = std::filesystem;

namespace {

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

fs::path fresh_dir(const std::string& name) {
  const auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

RunConfig tiny(const fs::path& out, const std::string& algorithm) {
  RunConfig c;
  c.env = "coordination";
  c.algorithm = algorithm;
  c.out_dir = out.string();
  c.open_ended.iterations = 2;
  c.open_ended.ego_updates = 2;
  c.open_ended.ego.num_envs = 4;
  c.open_ended.ego_embed = c.open_ended.ego_hidden = c.open_ended.ego_head = 8;
  c.open_ended.teammate.updates = 2;
  c.open_ended.teammate.hidden = 8;
  c.open_ended.teammate.counts = {2, 2, 2, 2};
  c.minimax.updates = 2;
  c.minimax.hidden = 8;
  c.brdiv.updates = 2;
  c.brdiv.hidden = 8;
  c.ippo.hidden = 8;
  c.ippo.ppo.total_timesteps = 64;
  c.fcp.seeds = 2;
  c.fcp.checkpoints = 2;
  return c;
}

int run_args(std::vector<std::string> args) {
  args.insert(args.begin(), "aht");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return run(static_cast<int>(argv.size()), argv.data());
}

}  // namespace

TEST_CASE("config: every key is unique and dotted keys match sections") {
  RunConfig c;
  std::set<std::string> keys;
  for (const auto& f : fields(c)) CHECK(keys.insert(f.key).second);
  CHECK(keys.count("teammate.ent_coef") == 1);
  CHECK(keys.count("teammate.regret_weight") == 1);
  CHECK(keys.count("ego.lr") == 1);

  RunConfig a, b;
  apply_config_text(a, "[teammate]\nent_coef = 0.02\n[ego]\nlr = 1e-4\n");
  apply_config_text(b, "teammate.ent_coef = 0.02\nego.lr = 1e-4\n");
  CHECK(serialize(a) == serialize(b));
  CHECK(a.open_ended.teammate.ppo.ent_coef == 0.02);
  CHECK(a.open_ended.ego.lr == 1e-4);
}

TEST_CASE("config: snapshot re-parses to identical bytes") {
  RunConfig c;
  c.seed = 17;
  c.out_dir = "runs/with \"quotes\" and # hash";
  c.open_ended.ego.lr = 0.1;
  c.open_ended.teammate.ppo.ent_coef = 1.0 / 3.0;
  c.lbf.step_penalty = 1e-300;
  c.brdiv.xp_weight = 2.0;
  c.ippo.ppo.anneal_lr = true;
  const std::string snap = serialize(c);
  RunConfig back;
  apply_config_text(back, snap);
  CHECK(serialize(back) == snap);
  CHECK(back.open_ended.teammate.ppo.ent_coef == 1.0 / 3.0);
  CHECK(back.out_dir == c.out_dir);
  CHECK(snap.find("brdiv.xp_weight = 2.0\n") != std::string::npos);
}

TEST_CASE("config: errors name the line") {
  RunConfig c;
  CHECK(message_of([&] { apply_config_text(c, "seed = 1\n\n[ego]\nlrr = 3\n", "f.toml"); })
            .find("f.toml:4: unknown key 'ego.lrr'") != std::string::npos);
  CHECK(message_of([&] { apply_config_text(c, "seed = 1\nseed = 2\n"); }).find(":2: duplicate") != std::string::npos);
  CHECK(message_of([&] { apply_config_text(c, "seed = -1\n"); }).find(":1: bad value") != std::string::npos);
  CHECK(message_of([&] { apply_config_text(c, "ego.epochs = 2.5\n"); }).find("bad value") != std::string::npos);
  CHECK(message_of([&] { apply_config_text(c, "ego.anneal_lr = yes\n"); }).find("true or false") != std::string::npos);
  CHECK(message_of([&] { apply_config_text(c, "env = lbf\n"); }).find("quoted") != std::string::npos);
  CHECK(message_of([&] { apply_config_text(c, "# ok\n[ego\n"); }).find(":2: unterminated") != std::string::npos);
  CHECK(message_of([&] { apply_config_text(c, "just words\n"); }).find(":1: expected") != std::string::npos);
}

TEST_CASE("config: comments, separators and overrides") {
  RunConfig c;
  apply_config_text(c, "out_dir = \"a#b\"  # trailing\nippo.total_timesteps = 1_000_000\n");
  CHECK(c.out_dir == "a#b");
  CHECK(c.ippo.ppo.total_timesteps == 1000000);
  apply_override(c, "out_dir=elsewhere");
  apply_override(c, "ippo.total_timesteps=5");
  CHECK(c.out_dir == "elsewhere");
  CHECK(c.ippo.ppo.total_timesteps == 5);
  CHECK_THROWS_AS(apply_override(c, "no_equals"), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "nope=1"), ConfigError);
}

TEST_CASE("config: finalize resolves the algorithm and validates") {
  RunConfig c;
  c.algorithm = "rotate-traj";
  c.finalize();
  CHECK(c.open_ended.teammate.mode == regret::RegretMode::per_trajectory);
  c.algorithm = "rotate-nobuffer";
  c.finalize();
  CHECK(c.open_ended.teammate.mode == regret::RegretMode::per_state);
  CHECK_FALSE(c.open_ended.population_buffer_enabled);
  for (const char* a : {"rotate", "rotate-gae", "rotate-mp", "minimax", "fcp", "brdiv", "ippo"}) {
    c.algorithm = a;
    CHECK_NOTHROW(c.finalize());
    CHECK(to_string(c.algorithm_id()) == std::string(a));
  }
  c.algorithm = "paired";
  CHECK_THROWS_AS(c.finalize(), ConfigError);
  RunConfig d;
  d.env = "hanabi";
  CHECK_THROWS_AS(d.finalize(), ConfigError);
  RunConfig e;
  e.open_ended.ego.lr = 0.0;
  CHECK_THROWS_AS(e.finalize(), ConfigError);
  RunConfig s;
  s.seed = eval::kEvalSeedBase;
  CHECK_THROWS_AS(s.finalize(), ConfigError);
}

TEST_CASE("shipped configs parse and validate") {
  for (const auto& entry : fs::directory_iterator(fs::path(AHT_SOURCE_DIR) / "configs")) {
    CAPTURE(entry.path().string());
    auto c = load_config(entry.path());
    CHECK_NOTHROW(c.finalize());
  }
  auto r = load_config(fs::path(AHT_SOURCE_DIR) / "configs" / "lbf_rotate.toml");
  CHECK(r.open_ended.iterations == 10);
  CHECK(r.open_ended.teammate.ppo.ent_coef == 0.003);
}

TEST_CASE("train: every algorithm writes checkpoints and a matching snapshot") {
  for (const char* alg : {"rotate", "rotate-traj", "rotate-gae", "rotate-mp", "rotate-nobuffer", "minimax", "fcp",
                          "brdiv", "ippo"}) {
    CAPTURE(alg);
    const auto dir = fresh_dir(std::string("aht_train_") + alg);
    std::ostringstream log;
    const auto ckpt = train(tiny(dir, alg), log);
    CHECK(fs::exists(ckpt));
    CHECK(fs::exists(dir / "diagnostics.jsonl"));
    RunConfig snap = load_config(dir / "config.snapshot");
    std::ifstream in(dir / "config.snapshot");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(serialize(snap) == ss.str());
    if (std::string(alg) != "ippo") {
      CHECK(fs::exists(dir / "ego" / "ego_0002.ckpt"));
      CHECK(nn::load_checkpoint(dir / "ego" / "ego_0002.ckpt") == nn::load_checkpoint(ckpt));
    }
    fs::remove_all(dir);
  }
}

TEST_CASE("train: identical config and seed give identical checkpoints") {
  const auto a = fresh_dir("aht_det_a"), b = fresh_dir("aht_det_b");
  std::ostringstream log;
  const auto ca = train(tiny(a, "rotate"), log);
  const auto cb = train(tiny(b, "rotate"), log);
  CHECK(nn::load_checkpoint(ca) == nn::load_checkpoint(cb));
  auto other = tiny(a, "rotate");
  other.seed = 3;
  CHECK_THROWS_AS(train(other, log), ConfigError);
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST_CASE("run: exit codes") {
  CHECK(run_args({"train", "--set", "bogus=1"}) == 2);
  CHECK(run_args({"frobnicate"}) == 2);
  CHECK(run_args({"train", "--workers", "-3"}) == 2);
  CHECK(run_args({"report", "/nonexistent/run"}) == 3);
  const auto dir = fresh_dir("aht_run_exit");
  CHECK(run_args({"train", "--set", "env=coordination", "--set", "algorithm=ippo", "--set", "ippo.total_timesteps=32",
                  "--out", dir.string()}) == 0);
  CHECK(fs::exists(dir / "ego" / "final.ckpt"));
  fs::remove_all(dir);
}

TEST_CASE("report: merges runs with one row per teammate and an aggregate row") {
  const auto root = fresh_dir("aht_merge");
  for (const char* alg : {"rotate", "minimax"}) {
    const auto run_dir = root / alg;
    fs::create_directories(run_dir / "eval");
    RunConfig c;
    c.algorithm = alg;
    std::ofstream(run_dir / "config.snapshot") << serialize(c);
    eval::EvalReport r;
    r.teammates = {{"seq_col", eval::TeammateKind::heuristic, 0.5, 0, 0, 0, 0, {0.25, 0.5}},
                   {"ippo_0", eval::TeammateKind::ippo, 0.4, 0, 0, 0, 0, {0.1}}};
    eval::aggregate(r, 100, Rng(1));
    eval::emit_report(r, run_dir / "eval");
  }
  const std::string csv = merge_reports({root / "rotate", root / "minimax" / "eval" / "report.json"});
  std::istringstream in(csv);
  std::vector<std::string> rows;
  for (std::string l; std::getline(in, l);) rows.push_back(l);
  REQUIRE(rows.size() == 7);
  CHECK(rows[0] == "algorithm,run,teammate,kind,raw_mean,normalized_mean,ci_low,ci_high");
  CHECK(rows[1].rfind("rotate,", 0) == 0);
  CHECK(rows[3].find(",aggregate,all,") != std::string::npos);
  CHECK(rows[4].rfind("minimax,", 0) == 0);
  fs::remove_all(root);
}
