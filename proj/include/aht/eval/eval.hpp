#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "aht/baselines/baselines.hpp"
#include "aht/core/environment.hpp"
#include "aht/envs/heuristics.hpp"
#include "aht/nn/param_set.hpp"

namespace aht::eval {

inline constexpr int kReportSchema = 1;
// Learned suite members are trained with seeds from here upward; training
// runs must stay below it.
inline constexpr std::uint64_t kEvalSeedBase = 1'000'000;
inline constexpr double kUpperBoundFloor = 1e-6;

enum class TeammateKind { heuristic, ippo, brdiv };

const char* to_string(TeammateKind k);
TeammateKind parse_teammate_kind(const std::string& s);

struct EvalTeammate {
  std::string name;
  TeammateKind kind = TeammateKind::heuristic;
  std::optional<envs::HeuristicAgent> heuristic;
  std::optional<nn::ParamSet> params;
  double upper_bound = 1.0;
  double lower_bound = 0.0;
  std::uint64_t seed = 0;  // training seed of learned members

  std::unique_ptr<Policy> make_policy() const;
};

using EvalSuite = std::vector<EvalTeammate>;

struct BrConfig {
  ppo::PpoConfig ppo;
  int hidden = 64;
  int episodes = 64;
};

struct SuiteConfig {
  int ippo_seeds = 2;
  baselines::IppoConfig ippo;
  int brdiv_n = 2;  // 0 disables BRDiv members
  baselines::BrdivConfig brdiv;
  BrConfig br;
  bool estimate_heuristic_bounds = false;  // LBF heuristics default to the full 0.5
};

// LBF: six sequencing heuristics, IPPO seeds and BRDiv confederates.
// Cramped Room: the nine cooks and IPPO seeds.
EvalSuite build_eval_suite(const Environment& env, const SuiteConfig& cfg, const Rng& rng);

void save_suite(const std::filesystem::path& dir, const EvalSuite& suite, const std::string& env_name);
EvalSuite load_suite(const std::filesystem::path& dir, std::string* env_name = nullptr);

// Mean raw return of a PPO best response trained against the frozen teammate
// (slot 1), floored at kUpperBoundFloor.
double estimate_upper_bound(Policy& teammate, const Environment& env, const BrConfig& cfg, const Rng& rng);

struct TeammateResult {
  std::string name;
  TeammateKind kind = TeammateKind::heuristic;
  double upper_bound = 1.0;
  double raw_mean = 0.0;
  double normalized_mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::vector<double> returns;  // raw, per episode
};

struct EvalReport {
  std::vector<TeammateResult> teammates;
  double normalized_mean = 0.0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  std::uint64_t seed = 0;
  int episodes = 0;
  std::string checkpoint;
  std::string env;

  nlohmann::json to_json() const;
  static EvalReport from_json(const nlohmann::json& j);
};

struct EvalOptions {
  int episodes = 64;
  bool greedy = false;
  int bootstrap_resamples = 10000;
  std::uint64_t seed = 0;
  std::string checkpoint;
};

// Runs (ego in slot 0, teammate in slot 1) episodes from the initial state
// distribution against every suite member and aggregates normalized returns.
EvalReport evaluate_ego(const nn::ParamSet& ego, const EvalSuite& suite, const Environment& env,
                        const EvalOptions& opts = {});

// Aggregate of per-teammate normalized means, and a bootstrap CI that
// resamples episodes within each teammate.
void aggregate(EvalReport& report, int resamples, const Rng& rng);

// report.json and per_teammate.csv in `dir`.
void emit_report(const EvalReport& report, const std::filesystem::path& dir);

// Greedy wrapper: all mass on the wrapped policy's most likely action.
class GreedyPolicy : public Policy {
 public:
  explicit GreedyPolicy(Policy& inner) : inner_(inner) {}
  void begin_episode(const Environment& env, int agent) override { inner_.begin_episode(env, agent); }
  void action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                    std::span<Real> probs) override;
  void observe_action(int action) override { inner_.observe_action(action); }

 private:
  Policy& inner_;
};

}  // namespace aht::eval
