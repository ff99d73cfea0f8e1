#pragma once

#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "aht/core/environment.hpp"
#include "aht/open_ended/population.hpp"
#include "aht/ppo/ppo.hpp"
#include "aht/regret/teammate_gen.hpp"

namespace aht::open_ended {

inline ppo::PpoConfig default_ego_ppo() {
  ppo::PpoConfig c;
  c.lr = 3e-5;
  c.ent_coef = 1e-3;
  return c;
}

struct OpenEndedConfig {
  int iterations = 30;
  int ego_updates = 20;  // rounds per iteration; each round samples one teammate
  ppo::PpoConfig ego = default_ego_ppo();
  int ego_embed = 64;
  int ego_hidden = 64;
  int ego_head = 64;
  regret::TeammateGenConfig teammate;
  bool population_buffer_enabled = true;
  bool reset_ego_optimizer = false;

  void validate() const;
};

struct GeneratedTeammate {
  nn::ParamSet params;
  nlohmann::json diagnostics;
  long env_steps = 0;
};

// Produces one teammate against the frozen ego (the TeammateGenerator slot).
using TeammateGenerator = std::function<GeneratedTeammate(Policy& ego, const Environment& env, const Rng& rng)>;

TeammateGenerator regret_generator(const regret::TeammateGenConfig& cfg);

struct EgoUpdateStats {
  std::vector<std::size_t> sampled;  // buffer index used in each round
  std::vector<ppo::PpoDiagnostics> rounds;
  long env_steps = 0;
  double mean_return = 0.0;
};

// Uniform draw of a buffer index for one ego round.
std::size_t sample_teammate_index(std::size_t buffer_size, const Rng& round_rng);

// cfg.ego_updates rounds of: uniform teammate draw, cfg.ego.num_envs episodes
// of (ego, teammate) from the initial distribution, one recurrent PPO update.
EgoUpdateStats ego_update(ppo::RecurrentLearner& ego, const PopulationBuffer& buffer, const Environment& env,
                          const OpenEndedConfig& cfg, const Rng& rng, long steps_done = 0);

struct OpenEndedResult {
  ppo::RecurrentLearner ego;
  PopulationBuffer buffer;
  std::vector<nn::ParamSet> ego_history;  // ego after each iteration
  std::vector<nlohmann::json> diagnostics;
  long env_steps = 0;
  int resumed_from = 0;  // completed iterations found on disk
};

using IterationCallback = std::function<void(const nlohmann::json& diagnostics_line)>;

// Run directory (optional):
//   teammates/teammate_NNNN.{ckpt,json}, teammates/members.json
//   ego/ego_NNNN.ckpt, ego/optimizer.bin, ego/latest.json
//   diagnostics.jsonl
// An existing run directory is resumed from its last complete iteration.
OpenEndedResult open_ended_train(const OpenEndedConfig& cfg, const Environment& env, const Rng& rng,
                                 const std::optional<std::filesystem::path>& run_dir = std::nullopt,
                                 const TeammateGenerator& generator = {}, const IterationCallback& on_iteration = {});

std::filesystem::path ego_checkpoint_path(const std::filesystem::path& run_dir, int iteration);

}  // namespace aht::open_ended
