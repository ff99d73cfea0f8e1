#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "aht/core/environment.hpp"
#include "aht/core/rollout.hpp"
#include "aht/nn/adam.hpp"
#include "aht/nn/param_set.hpp"
#include "aht/ppo/ppo.hpp"

// Slot convention for every interaction collected here: slot 0 holds the
// ego or the best response, slot 1 holds the generated teammate.
namespace aht::regret {

inline constexpr int kEgoSlot = 0;
inline constexpr int kTeammateSlot = 1;

enum class RegretMode { per_state, per_trajectory, gae_regret, mixed_play };

const char* to_string(RegretMode m);
RegretMode parse_regret_mode(const std::string& s);

struct InteractionCounts {
  int sp = 8;
  int xp = 8;
  int sxp = 8;
  int mp = 8;
};

struct TeammateGenConfig {
  RegretMode mode = RegretMode::per_state;
  ppo::PpoConfig ppo;
  int updates = 30;       // outer iterations of collect -> update
  InteractionCounts counts;
  double regret_weight = 2.0;
  bool normalize_regret = true;
  bool restart_from_states = true;  // false: random-switch fallback for SXP
  double mixture_ego_prob = 0.5;
  int hidden = 64;

  void validate() const;
};

// Teammate actor, best-response actor, and the three critics of one
// generation run: BR critic (BR view), teammate critic with the BR, teammate
// critic with the ego.
struct TeammateGenState {
  nn::ParamSet teammate;
  nn::ParamSet br;
  nn::ParamSet br_critic;
  nn::ParamSet tm_br_critic;
  nn::ParamSet tm_ego_critic;
  nn::AdamState teammate_opt;
  nn::AdamState br_opt;
  nn::AdamState br_critic_opt;
  nn::AdamState tm_br_critic_opt;
  nn::AdamState tm_ego_critic_opt;
  RegretMode mode = RegretMode::per_state;

  static TeammateGenState create(const EnvDescriptor& env, int hidden, RegretMode mode, Rng& rng);
  bool operator==(const TeammateGenState&) const = default;
};

struct Interactions {
  TrajectoryBatch sp;
  TrajectoryBatch xp;
  TrajectoryBatch sxp;
  std::vector<EnvSnapshot> sxp_starts;  // restart states used for SXP (restart mode)
};

// SP: (BR, teammate) from the initial distribution. XP: (ego, teammate).
// SXP: (BR, teammate) restarted from XP-visited states sampled uniformly, or
// with the random-switch fallback the post-switch part of (ego -> BR,
// teammate) episodes. A zero SXP count skips the phase.
Interactions collect_interactions(const TeammateGenState& state, Policy& ego, const Environment& env,
                                  const InteractionCounts& counts, const Rng& rng, bool restart_from_states = true);

struct MixedPlayData {
  TrajectoryBatch mp;               // (BR, teammate) from the sampled start states, mode MP
  TrajectoryBatch start_rollouts;   // (ego/BR mixture, teammate) episodes the starts come from
  std::vector<EnvSnapshot> starts;
};

MixedPlayData mixed_play_collect(const TeammateGenState& state, Policy& ego, const Environment& env, int count,
                                 const Rng& rng, double ego_prob = 0.5);

// V_br(s) - (r + gamma * V_ego(s')), with V_ego(s') = 0 when the transition
// is terminal (next_obs == nullptr).
double regret_target(const nn::ParamSet& tm_br_critic, const nn::ParamSet& tm_ego_critic, const Vector& obs,
                     double reward, const Vector* next_obs, double gamma);

// regret_target for every transition of an XP batch, seen from the teammate.
Vector regret_targets(const nn::ParamSet& tm_br_critic, const nn::ParamSet& tm_ego_critic,
                      const TrajectoryBatch& xp, double gamma);

struct TeammateBatches {
  const TrajectoryBatch* sp = nullptr;
  const TrajectoryBatch* xp = nullptr;
  const TrajectoryBatch* sxp = nullptr;
  const TrajectoryBatch* mp = nullptr;
};

// The weighted PPO terms making up the teammate's objective in `mode`,
// built from the (old) parameters in `state`.
struct TeammateTerms {
  std::vector<ppo::AdvantageBatch> batches;
  std::vector<double> weights;
  std::vector<std::string> names;
  std::vector<bool> normalize;

  std::vector<ppo::PolicyTerm> policy_terms() const;
};

TeammateTerms teammate_policy_terms(const TeammateGenState& state, const TeammateBatches& data, RegretMode mode,
                                    const TeammateGenConfig& cfg);

// Sum of the weighted PPO-clip terms evaluated at `teammate`.
double teammate_policy_loss(const nn::ParamSet& teammate, const TeammateTerms& terms, const TeammateGenConfig& cfg);

struct GenDiagnostics {
  int update = 0;
  double mean_regret = 0.0;  // mean A_reg over XP transitions
  double sp_return = 0.0;    // mean raw episode return
  double xp_return = 0.0;
  double sxp_return = 0.0;
  double teammate_loss = 0.0;
  double br_loss = 0.0;
  double teammate_entropy = 0.0;
  long env_steps = 0;

  nlohmann::json to_json() const;
};

struct TeammateGenResult {
  nn::ParamSet teammate;
  TeammateGenState state;
  std::vector<GenDiagnostics> diagnostics;
  long env_steps = 0;
};

// Runs cfg.updates rounds of collect -> teammate, BR and critic updates
// against a frozen ego.
TeammateGenResult generate_teammate(Policy& ego, const Environment& env, const TeammateGenConfig& cfg,
                                    const Rng& rng);

// Writes teammate_{iter:04}.ckpt plus a JSON sidecar of diagnostics.
std::filesystem::path save_teammate(const std::filesystem::path& dir, int iter, const nn::ParamSet& teammate,
                                    const nlohmann::json& sidecar);

}  // namespace aht::regret
