#include "aht/cli/config.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "aht/envs/matrix_game.hpp"

namespace aht::cli {

namespace {

constexpr std::pair<Algorithm, const char*> kAlgorithms[] = {
    {Algorithm::rotate, "rotate"},         {Algorithm::rotate_traj, "rotate-traj"},
    {Algorithm::rotate_gae, "rotate-gae"}, {Algorithm::rotate_mp, "rotate-mp"},
    {Algorithm::rotate_nobuffer, "rotate-nobuffer"}, {Algorithm::minimax, "minimax"},
    {Algorithm::fcp, "fcp"},               {Algorithm::brdiv, "brdiv"},
    {Algorithm::ippo, "ippo"},
};

void add_ppo(std::vector<Field>& out, const std::string& p, ppo::PpoConfig& c) {
  out.push_back({p + ".clip_eps", &c.clip_eps});
  out.push_back({p + ".epochs", &c.epochs});
  out.push_back({p + ".minibatches", &c.minibatches});
  out.push_back({p + ".ent_coef", &c.ent_coef});
  out.push_back({p + ".lr", &c.lr});
  out.push_back({p + ".anneal_lr", &c.anneal_lr});
  out.push_back({p + ".gamma", &c.gamma});
  out.push_back({p + ".lambda", &c.lambda});
  out.push_back({p + ".num_envs", &c.num_envs});
  out.push_back({p + ".total_timesteps", &c.total_timesteps});
  out.push_back({p + ".max_grad_norm", &c.max_grad_norm});
  out.push_back({p + ".normalize_advantages", &c.normalize_advantages});
  out.push_back({p + ".vf_coef", &c.vf_coef});
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& k) {
  if (k.empty() || k.front() == '.' || k.back() == '.') return false;
  for (char c : k)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-')) return false;
  return true;
}

// Drops a trailing comment, leaving `#` inside quotes alone.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '\\' && quoted) {
      ++i;
    } else if (line[i] == '"') {
      quoted = !quoted;
    } else if (line[i] == '#' && !quoted) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string unquote(const std::string& v) {
  if (v.size() < 2 || v.front() != '"' || v.back() != '"') throw std::invalid_argument("expected a quoted string");
  std::string out;
  for (std::size_t i = 1; i + 1 < v.size(); ++i) {
    if (v[i] == '\\') {
      if (i + 2 >= v.size()) throw std::invalid_argument("dangling escape");
      const char e = v[++i];
      if (e == '"' || e == '\\') {
        out += e;
      } else if (e == 'n') {
        out += '\n';
      } else {
        throw std::invalid_argument("unsupported escape");
      }
    } else if (v[i] == '"') {
      throw std::invalid_argument("unescaped quote in string");
    } else {
      out += v[i];
    }
  }
  return out;
}

std::string quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else {
      out += c;
    }
  }
  return out + "\"";
}

template <typename T>
T parse_number(std::string v) {
  // TOML digit separators: 1_000_000
  std::string digits;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (v[i] == '_') {
      if (i == 0 || i + 1 == v.size() || !std::isdigit(static_cast<unsigned char>(v[i - 1])) ||
          !std::isdigit(static_cast<unsigned char>(v[i + 1])))
        throw std::invalid_argument("misplaced '_'");
      continue;
    }
    digits += v[i];
  }
  if (!digits.empty() && digits.front() == '+') digits.erase(0, 1);
  T out{};
  const auto* end = digits.data() + digits.size();
  const auto r = std::from_chars(digits.data(), end, out);
  if (digits.empty() || r.ec != std::errc() || r.ptr != end) throw std::invalid_argument("not a valid number");
  return out;
}

void assign(const FieldRef& ref, const std::string& raw) {
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, bool>) {
          if (raw == "true") {
            *p = true;
          } else if (raw == "false") {
            *p = false;
          } else {
            throw std::invalid_argument("expected true or false");
          }
        } else if constexpr (std::is_same_v<T, std::string>) {
          *p = unquote(raw);
        } else {
          *p = parse_number<T>(raw);
        }
      },
      ref);
}

std::string format(const FieldRef& ref) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, bool>) {
          return *p ? "true" : "false";
        } else if constexpr (std::is_same_v<T, std::string>) {
          return quote(*p);
        } else {
          char buf[64];
          const auto r = std::to_chars(buf, buf + sizeof buf, *p);
          std::string s(buf, r.ptr);
          if constexpr (std::is_floating_point_v<T>) {
            // keep floats recognizable as floats
            if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
          }
          return s;
        }
      },
      ref);
}

[[noreturn]] void fail(const std::string& source, int line, const std::string& msg) {
  throw ConfigError(source + ":" + std::to_string(line) + ": " + msg);
}

void require(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

}  // namespace

const char* to_string(Algorithm a) {
  for (const auto& [id, name] : kAlgorithms)
    if (id == a) return name;
  return "?";
}

Algorithm parse_algorithm(const std::string& s) {
  for (const auto& [id, name] : kAlgorithms)
    if (s == name) return id;
  throw ConfigError("unknown algorithm '" + s + "'");
}

std::vector<Field> fields(RunConfig& c) {
  std::vector<Field> f{{"env", &c.env},
                       {"algorithm", &c.algorithm},
                       {"seed", &c.seed},
                       {"out_dir", &c.out_dir},
                       {"workers", &c.workers}};

  auto& l = c.lbf;
  f.insert(f.end(), {{"lbf.grid", &l.grid},
                     {"lbf.num_foods", &l.num_foods},
                     {"lbf.player_level", &l.player_level},
                     {"lbf.food_level", &l.food_level},
                     {"lbf.horizon", &l.horizon},
                     {"lbf.total_reward", &l.total_reward},
                     {"lbf.step_penalty", &l.step_penalty},
                     {"lbf.gamma", &l.gamma}});

  auto& o = c.overcooked;
  f.insert(f.end(), {{"overcooked.horizon", &o.horizon},
                     {"overcooked.cook_time", &o.cook_time},
                     {"overcooked.urgency_steps", &o.urgency_steps},
                     {"overcooked.delivery_reward", &o.delivery_reward},
                     {"overcooked.onion_pickup", &o.onion_pickup},
                     {"overcooked.onion_in_pot", &o.onion_in_pot},
                     {"overcooked.plate_pickup", &o.plate_pickup},
                     {"overcooked.soup_plated", &o.soup_plated},
                     {"overcooked.shaping_scale", &o.shaping_scale},
                     {"overcooked.gamma", &o.gamma}});

  auto& oe = c.open_ended;
  f.insert(f.end(), {{"open_ended.iterations", &oe.iterations},
                     {"open_ended.ego_updates", &oe.ego_updates},
                     {"open_ended.population_buffer", &oe.population_buffer_enabled},
                     {"open_ended.reset_ego_optimizer", &oe.reset_ego_optimizer}});
  add_ppo(f, "ego", oe.ego);
  f.insert(f.end(), {{"ego.embed", &oe.ego_embed}, {"ego.hidden", &oe.ego_hidden}, {"ego.head", &oe.ego_head}});

  auto& t = oe.teammate;
  add_ppo(f, "teammate", t.ppo);
  f.insert(f.end(), {{"teammate.updates", &t.updates},
                     {"teammate.hidden", &t.hidden},
                     {"teammate.sp_episodes", &t.counts.sp},
                     {"teammate.xp_episodes", &t.counts.xp},
                     {"teammate.sxp_episodes", &t.counts.sxp},
                     {"teammate.mp_episodes", &t.counts.mp},
                     {"teammate.regret_weight", &t.regret_weight},
                     {"teammate.normalize_regret", &t.normalize_regret},
                     {"teammate.restart_from_states", &t.restart_from_states},
                     {"teammate.mixture_ego_prob", &t.mixture_ego_prob}});

  add_ppo(f, "ippo", c.ippo.ppo);
  f.push_back({"ippo.hidden", &c.ippo.hidden});

  add_ppo(f, "minimax", c.minimax.ppo);
  f.insert(f.end(), {{"minimax.hidden", &c.minimax.hidden}, {"minimax.updates", &c.minimax.updates}});

  add_ppo(f, "brdiv", c.brdiv.ppo);
  f.insert(f.end(), {{"brdiv.hidden", &c.brdiv.hidden},
                     {"brdiv.n", &c.brdiv.n},
                     {"brdiv.xp_weight", &c.brdiv.xp_weight},
                     {"brdiv.updates", &c.brdiv.updates},
                     {"brdiv.episodes_per_pair", &c.brdiv.episodes_per_pair}});

  f.insert(f.end(), {{"fcp.seeds", &c.fcp.seeds}, {"fcp.checkpoints", &c.fcp.checkpoints}});

  f.insert(f.end(), {{"suite.ippo_seeds", &c.suite.ippo_seeds},
                     {"suite.brdiv_n", &c.suite.brdiv_n},
                     {"suite.estimate_heuristic_bounds", &c.suite.estimate_heuristic_bounds}});
  add_ppo(f, "br", c.suite.br.ppo);
  f.insert(f.end(), {{"br.hidden", &c.suite.br.hidden}, {"br.episodes", &c.suite.br.episodes}});

  f.insert(f.end(), {{"eval.episodes", &c.eval.episodes},
                     {"eval.greedy", &c.eval.greedy},
                     {"eval.bootstrap_resamples", &c.eval.bootstrap_resamples}});
  return f;
}

Algorithm RunConfig::algorithm_id() const { return parse_algorithm(algorithm); }

void RunConfig::finalize() {
  const Algorithm a = algorithm_id();
  require(env == "lbf" || env == "overcooked" || env == "coordination",
          "env must be lbf, overcooked or coordination, got '" + env + "'");
  require(!out_dir.empty(), "out_dir is empty");
  require(workers >= 0, "workers must be >= 0");
  switch (a) {
    case Algorithm::rotate_traj: open_ended.teammate.mode = regret::RegretMode::per_trajectory; break;
    case Algorithm::rotate_gae: open_ended.teammate.mode = regret::RegretMode::gae_regret; break;
    case Algorithm::rotate_mp: open_ended.teammate.mode = regret::RegretMode::mixed_play; break;
    default: open_ended.teammate.mode = regret::RegretMode::per_state; break;
  }
  if (a == Algorithm::rotate_nobuffer) open_ended.population_buffer_enabled = false;
  suite.ippo = ippo;
  suite.brdiv = brdiv;
  try {
    lbf.validate();
    overcooked.validate();
    open_ended.validate();
    ippo.ppo.validate();
    minimax.ppo.validate();
    brdiv.ppo.validate();
    suite.br.ppo.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  require(ippo.hidden > 0 && minimax.hidden > 0 && brdiv.hidden > 0 && suite.br.hidden > 0, "hidden sizes must be > 0");
  require(minimax.updates >= 0, "minimax.updates must be >= 0");
  require(brdiv.n >= 2, "brdiv.n must be >= 2");
  require(brdiv.xp_weight >= 0.0, "brdiv.xp_weight must be >= 0");
  require(brdiv.updates >= 0 && brdiv.episodes_per_pair > 0, "brdiv.updates >= 0 and brdiv.episodes_per_pair > 0");
  require(fcp.seeds > 0 && fcp.checkpoints > 0, "fcp.seeds and fcp.checkpoints must be > 0");
  require(suite.ippo_seeds >= 0 && suite.brdiv_n >= 0 && suite.brdiv_n != 1, "suite.ippo_seeds >= 0, suite.brdiv_n 0 or >= 2");
  require(suite.br.episodes > 0, "br.episodes must be > 0");
  require(eval.episodes > 0 && eval.bootstrap_resamples >= 0, "eval.episodes > 0 and eval.bootstrap_resamples >= 0");
  require(seed < eval::kEvalSeedBase, "seed must be below " + std::to_string(eval::kEvalSeedBase) +
                                          " (reserved for evaluation teammates)");
}

void apply_config_text(RunConfig& cfg, const std::string& text, const std::string& source) {
  auto fs = fields(cfg);
  std::map<std::string, const FieldRef*> index;
  for (const auto& f : fs) index[f.key] = &f.ref;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string raw, section;
  int lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail(source, lineno, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!valid_key(section)) fail(source, lineno, "invalid section name '" + section + "'");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail(source, lineno, "expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!valid_key(key)) fail(source, lineno, "invalid key '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    const auto it = index.find(full);
    if (it == index.end()) fail(source, lineno, "unknown key '" + full + "'");
    if (!seen.insert(full).second) fail(source, lineno, "duplicate key '" + full + "'");
    if (value.empty()) fail(source, lineno, "missing value for '" + full + "'");
    try {
      assign(*it->second, value);
    } catch (const std::invalid_argument& e) {
      fail(source, lineno, "bad value for '" + full + "': " + e.what());
    }
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig cfg;
  apply_config_text(cfg, ss.str(), path.string());
  return cfg;
}

void apply_override(RunConfig& cfg, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + assignment + "'");
  std::string value = trim(assignment.substr(eq + 1));
  const std::string key = trim(assignment.substr(0, eq));
  // bare words on the command line are taken as strings
  for (auto& f : fields(cfg))
    if (f.key == key && std::holds_alternative<std::string*>(f.ref) && (value.empty() || value.front() != '"'))
      value = quote(value);
  apply_config_text(cfg, key + " = " + value, "--set");
}

std::string serialize(const RunConfig& cfg) {
  RunConfig copy = cfg;
  std::string out;
  for (const auto& f : fields(copy)) out += f.key + " = " + format(f.ref) + "\n";
  return out;
}

std::unique_ptr<Environment> make_env(const RunConfig& cfg) {
  if (cfg.env == "lbf") return std::make_unique<envs::LbfEnv>(cfg.lbf);
  if (cfg.env == "overcooked") return std::make_unique<envs::OvercookedEnv>(cfg.overcooked);
  if (cfg.env == "coordination") return std::make_unique<envs::MatrixGameEnv>(envs::MatrixGameEnv::coordination());
  throw ConfigError("unknown env '" + cfg.env + "'");
}

}  // namespace aht::cli
