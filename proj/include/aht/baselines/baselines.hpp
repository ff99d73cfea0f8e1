#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "aht/core/environment.hpp"
#include "aht/open_ended/population.hpp"
#include "aht/ppo/ppo.hpp"

namespace aht::baselines {

struct IppoConfig {
  ppo::PpoConfig ppo;
  int hidden = 64;
};

struct IppoProgress {
  long update = 0;
  long env_steps = 0;
  double mean_return = 0.0;  // raw, per episode
};

struct IppoResult {
  ppo::ActorCritic agent0;
  ppo::ActorCritic agent1;
  std::vector<IppoProgress> curve;
  long env_steps = 0;
};

// Called after every update; may copy parameters out (checkpoints).
using IppoCallback = std::function<void(const IppoResult&, long update)>;

// Two independent PPO learners on shared self-play episodes until
// cfg.ppo.total_timesteps environment steps have been collected.
IppoResult ippo_train(const Environment& env, const IppoConfig& cfg, const Rng& rng, const IppoCallback& cb = {});

// The slot-1 actor of an IPPO run, used as a teammate.
nn::ParamSet ippo_selfplay(const Environment& env, const IppoConfig& cfg, const Rng& rng);

struct MinimaxConfig {
  ppo::PpoConfig ppo;
  int hidden = 64;
  int updates = 30;
};

// Teammate trained with PPO on XP episodes with the frozen ego, rewarded with
// the negated team reward.
nn::ParamSet minimax_teammate(Policy& ego, const Environment& env, const MinimaxConfig& cfg, const Rng& rng,
                              long* env_steps = nullptr);

// `seeds` IPPO runs, each snapshotted at `checkpoints_per_seed` evenly spaced
// updates (the last one included). Members are ordered by seed, then step.
open_ended::PopulationBuffer fcp_population(const Environment& env, int seeds, int checkpoints_per_seed,
                                            const IppoConfig& cfg, const Rng& rng);

struct BrdivConfig {
  ppo::PpoConfig ppo;
  int hidden = 64;
  int n = 2;
  double xp_weight = 1.0;
  int updates = 200;
  int episodes_per_pair = 8;
};

struct BrdivResult {
  open_ended::PopulationBuffer confederates;
  std::vector<nn::ParamSet> best_responses;
  Matrix xp_matrix;          // [i][j]: confederate i with BR j, mean raw return of the last update
  long pairings_per_update = 0;
  long env_steps = 0;
};

// Confederate i maximizes (1 + 2w) SP_ii - w sum_{j != i} (XP_ij + XP_ji);
// BR j mirrors this for its column and row. Critics see the obs plus a
// one-hot of the partner index.
BrdivResult brdiv_train(const Environment& env, const BrdivConfig& cfg, const Rng& rng);
open_ended::PopulationBuffer brdiv_population(const Environment& env, const BrdivConfig& cfg, const Rng& rng);

// Manifest JSON listing population members and where they came from.
void write_manifest(const std::filesystem::path& dir, const open_ended::PopulationBuffer& pop,
                    const std::string& algorithm, const nlohmann::json& provenance);

}  // namespace aht::baselines
