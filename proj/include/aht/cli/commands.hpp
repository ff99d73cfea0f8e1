#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "aht/cli/config.hpp"

namespace aht::cli {

// Runs cfg.algorithm end to end into cfg.out_dir and returns the final ego
// checkpoint (also copied to ego/final.ckpt). Progress lines go to `log`.
std::filesystem::path train(const RunConfig& cfg, std::ostream& log);

// Ego trained by open_ended::ego_update against a fixed population for
// cfg.iterations iterations (the FCP and BRDiv baselines).
ppo::RecurrentLearner train_on_population(const open_ended::OpenEndedConfig& cfg,
                                          const open_ended::PopulationBuffer& population, const Environment& env,
                                          const Rng& rng, const std::filesystem::path& run_dir, std::ostream& log);

eval::EvalReport evaluate_checkpoint(const std::filesystem::path& ckpt, const std::filesystem::path& suite_dir,
                                     RunConfig cfg);

// One CSV row per (run, teammate) plus an aggregate row per run.
std::string merge_reports(const std::vector<std::filesystem::path>& inputs);

// argv entry point: 0 ok, 2 configuration error, 3 runtime error.
int run(int argc, char** argv);

}  // namespace aht::cli
