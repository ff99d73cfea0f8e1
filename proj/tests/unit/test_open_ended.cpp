#include <fstream>

#include "aht/envs/lbf.hpp"
#include "aht/nn/checkpoint.hpp"
#include "aht/nn/init.hpp"
#include "aht/open_ended/open_ended.hpp"
#include "doctest.h"

using namespace aht;
using namespace aht::open_ended;

namespace {

OpenEndedConfig tiny_config(int iterations) {
  OpenEndedConfig cfg;
  cfg.iterations = iterations;
  cfg.ego_updates = 2;
  cfg.ego.num_envs = 2;
  cfg.ego.epochs = 1;
  cfg.ego_embed = cfg.ego_hidden = cfg.ego_head = 8;
  cfg.teammate.updates = 1;
  cfg.teammate.hidden = 8;
  cfg.teammate.counts = {2, 2, 2, 2};
  cfg.teammate.ppo.epochs = 1;
  return cfg;
}

nn::ParamSet random_teammate(std::uint64_t seed) {
  Rng r(seed);
  return nn::init_params<double>(nn::ShapeDescriptor::mlp(14, {8}, 6), true, r);
}

std::filesystem::path fresh_dir(const char* name) {
  const auto d = std::filesystem::temp_directory_path() / name;
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST_CASE("population buffer: append-only, persistence") {
  PopulationBuffer b;
  CHECK(b.empty());
  b.append({random_teammate(1), 1, "", {}});
  b.append({random_teammate(2), 2, "x", {{"k", 1}}});
  CHECK(b.size() == 2);
  CHECK(b[0].name == "member_0001");
  CHECK_THROWS(b.append({random_teammate(3), 3, "x", {}}));
  const auto dir = fresh_dir("aht_pop_test");
  b.save(dir);
  const auto back = PopulationBuffer::load(dir);
  REQUIRE(back.size() == 2);
  CHECK(back[1].params == b[1].params);
  CHECK(back[1].diagnostics["k"] == 1);
  std::filesystem::remove_all(dir);
}

TEST_CASE("ego_update: empty buffer is an error; single member is always used") {
  envs::LbfEnv env;
  auto cfg = tiny_config(1);
  Rng r(1);
  auto ego = ppo::RecurrentLearner::create(14, 6, 8, 8, 8, r);
  PopulationBuffer empty;
  CHECK_THROWS_WITH(ego_update(ego, empty, env, cfg, Rng(2)), doctest::Contains("empty"));
  PopulationBuffer one;
  one.append({random_teammate(3), 1, "t", {}});
  cfg.ego_updates = 5;
  const auto st = ego_update(ego, one, env, cfg, Rng(4));
  CHECK(st.sampled == std::vector<std::size_t>(5, 0));
  CHECK(st.rounds.size() == 5);
  CHECK(st.env_steps > 0);
}

TEST_CASE("ego_update: teammate draws are uniform (chi-square, 10k draws)") {
  const std::size_t k = 5;
  std::vector<int> counts(k, 0);
  const Rng rng(5);
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) ++counts[sample_teammate_index(k, rng.derive("round", static_cast<std::uint64_t>(i)))];
  double chi2 = 0.0;
  const double expect = static_cast<double>(draws) / static_cast<double>(k);
  for (int c : counts) chi2 += (c - expect) * (c - expect) / expect;
  CHECK(chi2 < 13.277);  // df 4, p = 0.01
}

TEST_CASE("ego_update: deterministic and leaves the buffer untouched") {
  envs::LbfEnv env;
  const auto cfg = tiny_config(1);
  PopulationBuffer buf;
  buf.append({random_teammate(6), 1, "a", {}});
  buf.append({random_teammate(7), 2, "b", {}});
  const auto copy = buf;
  Rng r(8);
  const auto start = ppo::RecurrentLearner::create(14, 6, 8, 8, 8, r);
  auto e1 = start, e2 = start;
  ego_update(e1, buf, env, cfg, Rng(9));
  ego_update(e2, buf, env, cfg, Rng(9));
  CHECK(e1 == e2);
  CHECK_FALSE(e1.net == start.net);
  for (std::size_t i = 0; i < buf.size(); ++i) CHECK(buf[i].params == copy[i].params);
}

TEST_CASE("open_ended_train: buffer growth, checkpoints, frozen teammates") {
  envs::LbfEnv env;
  const auto dir = fresh_dir("aht_oe_test");
  const auto res = open_ended_train(tiny_config(5), env, Rng(10), dir);
  CHECK(res.buffer.size() == 5);
  CHECK(res.ego_history.size() == 5);
  for (int i = 1; i <= 5; ++i) {
    CHECK(std::filesystem::exists(ego_checkpoint_path(dir, i)));
    CHECK(res.buffer[static_cast<std::size_t>(i - 1)].iteration == i);
  }
  CHECK(std::filesystem::exists(dir / "teammates" / "teammate_0005.ckpt"));
  CHECK(std::filesystem::exists(dir / "teammates" / "teammate_0005.json"));
  std::ifstream diag(dir / "diagnostics.jsonl");
  int lines = 0;
  std::size_t last_size = 0;
  for (std::string l; std::getline(diag, l);) {
    const auto j = nlohmann::json::parse(l);
    CHECK(j["buffer_size"].get<std::size_t>() == last_size + 1);
    last_size = j["buffer_size"].get<std::size_t>();
    ++lines;
  }
  CHECK(lines == 5);
  // teammates generated earlier are identical in a longer run
  const auto shorter = open_ended_train(tiny_config(2), env, Rng(10));
  CHECK(shorter.buffer[0].params == res.buffer[0].params);
  CHECK(shorter.buffer[1].params == res.buffer[1].params);
  CHECK(nn::load_checkpoint(dir / "teammates" / "teammate_0001.ckpt") == res.buffer[0].params);
  std::filesystem::remove_all(dir);
}

TEST_CASE("open_ended_train: resume continues bit-identically") {
  envs::LbfEnv env;
  const auto dir = fresh_dir("aht_oe_resume");
  const auto full = open_ended_train(tiny_config(4), env, Rng(11));
  open_ended_train(tiny_config(2), env, Rng(11), dir);
  const auto resumed = open_ended_train(tiny_config(4), env, Rng(11), dir);
  CHECK(resumed.resumed_from == 2);
  CHECK(resumed.ego == full.ego);
  CHECK(resumed.buffer.size() == 4);
  CHECK(resumed.buffer[3].params == full.buffer[3].params);
  CHECK(resumed.env_steps == full.env_steps);
  std::filesystem::remove_all(dir);
}

TEST_CASE("open_ended_train: without the buffer the ego only sees the newest teammate") {
  envs::LbfEnv env;
  auto cfg = tiny_config(3);
  cfg.population_buffer_enabled = false;
  cfg.ego_updates = 4;
  const auto res = open_ended_train(cfg, env, Rng(12));
  for (const auto& d : res.diagnostics) {
    const auto newest = d["buffer_size"].get<std::size_t>() - 1;
    for (const auto& s : d["ego"]["sampled"]) CHECK(s.get<std::size_t>() == newest);
  }
}

TEST_CASE("open_ended config validation") {
  auto cfg = tiny_config(1);
  CHECK_NOTHROW(cfg.validate());
  cfg.iterations = 0;
  CHECK_THROWS(cfg.validate());
  OpenEndedConfig d;
  CHECK(d.ego.lr == 3e-5);
  CHECK(d.ego.ent_coef == 1e-3);
  CHECK(d.ego.lr < d.teammate.ppo.lr);
}
