#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "aht/baselines/baselines.hpp"
#include "aht/core/environment.hpp"
#include "aht/envs/lbf.hpp"
#include "aht/envs/overcooked.hpp"
#include "aht/eval/eval.hpp"
#include "aht/open_ended/open_ended.hpp"

namespace aht::cli {

// Bad configuration or arguments; maps to exit status 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Algorithm { rotate, rotate_traj, rotate_gae, rotate_mp, rotate_nobuffer, minimax, fcp, brdiv, ippo };

const char* to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

struct FcpConfig {
  int seeds = 4;
  int checkpoints = 3;
};

struct EvalConfig {
  int episodes = 64;
  bool greedy = false;
  int bootstrap_resamples = 10000;
};

struct RunConfig {
  std::string env = "lbf";  // lbf | overcooked | coordination
  std::string algorithm = "rotate";
  std::uint64_t seed = 0;
  std::string out_dir = "runs/default";
  int workers = 0;  // 0: logical cores

  envs::LbfConfig lbf;
  envs::OvercookedConfig overcooked;
  open_ended::OpenEndedConfig open_ended;  // ego.*, teammate.*, open_ended.*
  baselines::IppoConfig ippo;
  baselines::MinimaxConfig minimax;
  baselines::BrdivConfig brdiv;
  FcpConfig fcp;
  eval::SuiteConfig suite;  // suite.*, br.*; suite members reuse ippo.* and brdiv.*
  EvalConfig eval;

  // Resolves derived fields (teammate regret mode, buffer flag) from the
  // algorithm id and checks every section.
  void finalize();
  Algorithm algorithm_id() const;
};

using FieldRef = std::variant<int*, long*, double*, bool*, std::string*, std::uint64_t*>;

struct Field {
  std::string key;
  FieldRef ref;
};

// Every addressable key, in snapshot order.
std::vector<Field> fields(RunConfig& cfg);

// TOML-style subset: `key = value`, `[section]` headers prefixing dotted
// keys, `#` comments, quoted strings, true/false. Unknown keys, duplicate
// keys and malformed values raise ConfigError naming the line.
void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::filesystem::path& path);

// `key=value` override from the command line.
void apply_override(RunConfig& cfg, const std::string& assignment);

// Flat `key = value` listing of every field; parsing it reproduces the
// config and serializing again gives the same bytes.
std::string serialize(const RunConfig& cfg);

std::unique_ptr<Environment> make_env(const RunConfig& cfg);

}  // namespace aht::cli
