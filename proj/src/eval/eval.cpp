#include "aht/eval/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "aht/agents/policies.hpp"
#include "aht/core/rollout.hpp"
#include "aht/nn/checkpoint.hpp"

namespace aht::eval {

namespace fs = std::filesystem;

const char* to_string(TeammateKind k) {
  switch (k) {
    case TeammateKind::heuristic: return "heuristic";
    case TeammateKind::ippo: return "ippo";
    case TeammateKind::brdiv: return "brdiv";
  }
  return "?";
}

TeammateKind parse_teammate_kind(const std::string& s) {
  for (auto k : {TeammateKind::heuristic, TeammateKind::ippo, TeammateKind::brdiv})
    if (s == to_string(k)) return k;
  throw std::invalid_argument("unknown teammate kind: " + s);
}

std::unique_ptr<Policy> EvalTeammate::make_policy() const {
  if (heuristic) return std::make_unique<envs::HeuristicPolicy>(*heuristic);
  if (params) return agents::make_policy(*params);
  throw std::logic_error("eval teammate " + name + " has no policy");
}

void GreedyPolicy::action_probs(const Environment& env, int agent, std::span<const Real> obs, Rng& rng,
                                std::span<Real> probs) {
  inner_.action_probs(env, agent, obs, rng, probs);
  const auto best = std::max_element(probs.begin(), probs.end()) - probs.begin();
  std::fill(probs.begin(), probs.end(), 0.0);
  probs[static_cast<std::size_t>(best)] = 1.0;
}

double estimate_upper_bound(Policy& teammate, const Environment& env, const BrConfig& cfg, const Rng& rng) {
  cfg.ppo.validate();
  const auto& desc = env.descriptor();
  Rng init = rng.derive("init");
  auto br = ppo::ActorCritic::create(desc.obs_dim, desc.num_actions, cfg.hidden, init);
  long steps = 0;
  for (long u = 0; steps < cfg.ppo.total_timesteps; ++u) {
    const Rng ur = rng.derive("update", static_cast<std::uint64_t>(u));
    agents::MlpPolicy actor(br.actor);
    const auto data = rollout(env, actor, teammate, StartSpec::initial(), cfg.ppo.num_envs, ur.derive("rollout"));
    const double lr = cfg.ppo.lr_at(steps);
    steps += static_cast<long>(data.batch.num_transitions());
    Rng tr = ur.derive("train");
    const auto d = ppo::ppo_update(br, data.batch, 0, cfg.ppo, lr, tr);
    if (!std::isfinite(d.policy_loss) || !std::isfinite(d.value_loss) || !br.actor.flat().allFinite())
      throw std::runtime_error("estimate_upper_bound: best-response training diverged");
  }
  agents::MlpPolicy actor(br.actor);
  const double ret =
      rollout(env, actor, teammate, StartSpec::initial(), cfg.episodes, rng.derive("evaluate")).batch.mean_raw_return();
  if (!std::isfinite(ret)) throw std::runtime_error("estimate_upper_bound: non-finite return");
  return std::max(ret, kUpperBoundFloor);
}

EvalSuite build_eval_suite(const Environment& env, const SuiteConfig& cfg, const Rng& rng) {
  const std::string& env_name = env.descriptor().name;
  const bool lbf = env_name == "lbf";
  if (!lbf && env_name.rfind("overcooked", 0) != 0)
    throw std::invalid_argument("build_eval_suite: unsupported environment " + env_name);
  EvalSuite suite;
  for (const auto& h : lbf ? envs::lbf_heuristics() : envs::overcooked_heuristics()) {
    EvalTeammate t;
    t.name = h.name();
    t.kind = TeammateKind::heuristic;
    t.heuristic = h;
    if (lbf && !cfg.estimate_heuristic_bounds) {
      t.upper_bound = 0.5;
    } else {
      envs::HeuristicPolicy p(h);
      t.upper_bound = estimate_upper_bound(p, env, cfg.br, rng.derive("bound", suite.size()));
    }
    suite.push_back(std::move(t));
  }
  for (int s = 0; s < cfg.ippo_seeds; ++s) {
    EvalTeammate t;
    t.seed = kEvalSeedBase + static_cast<std::uint64_t>(s);
    t.name = "ippo_" + std::to_string(s);
    t.kind = TeammateKind::ippo;
    t.params = baselines::ippo_selfplay(env, cfg.ippo, Rng(t.seed));
    agents::MlpPolicy p(*t.params);
    t.upper_bound = estimate_upper_bound(p, env, cfg.br, rng.derive("bound", suite.size()));
    suite.push_back(std::move(t));
  }
  if (lbf && cfg.brdiv_n > 0) {
    auto bc = cfg.brdiv;
    bc.n = cfg.brdiv_n;
    const std::uint64_t seed = kEvalSeedBase + 1000;
    const auto pop = baselines::brdiv_population(env, bc, Rng(seed));
    for (std::size_t i = 0; i < pop.size(); ++i) {
      EvalTeammate t;
      t.seed = seed;
      t.name = "brdiv_" + std::to_string(i);
      t.kind = TeammateKind::brdiv;
      t.params = pop[i].params;
      agents::MlpPolicy p(*t.params);
      t.upper_bound = estimate_upper_bound(p, env, cfg.br, rng.derive("bound", suite.size()));
      suite.push_back(std::move(t));
    }
  }
  return suite;
}

void save_suite(const fs::path& dir, const EvalSuite& suite, const std::string& env_name) {
  fs::create_directories(dir);
  nlohmann::json members = nlohmann::json::array();
  for (const auto& t : suite) {
    nlohmann::json m{{"name", t.name},
                     {"kind", to_string(t.kind)},
                     {"upper_bound", t.upper_bound},
                     {"lower_bound", t.lower_bound},
                     {"seed", t.seed}};
    if (t.heuristic) m["heuristic"] = t.heuristic->name();
    if (t.params) {
      nn::save_checkpoint(dir / (t.name + ".ckpt"), *t.params);
      m["file"] = t.name + ".ckpt";
    }
    members.push_back(m);
  }
  std::ofstream out(dir / "suite.json");
  if (!out) throw std::runtime_error("cannot write " + (dir / "suite.json").string());
  out << nlohmann::json{{"schema", kReportSchema}, {"env", env_name}, {"members", members}}.dump(2) << '\n';
}

EvalSuite load_suite(const fs::path& dir, std::string* env_name) {
  std::ifstream in(dir / "suite.json");
  if (!in) throw std::runtime_error("missing suite file " + (dir / "suite.json").string());
  const auto j = nlohmann::json::parse(in);
  if (env_name) *env_name = j.at("env").get<std::string>();
  EvalSuite suite;
  for (const auto& m : j.at("members")) {
    EvalTeammate t;
    t.name = m.at("name").get<std::string>();
    t.kind = parse_teammate_kind(m.at("kind").get<std::string>());
    t.upper_bound = m.at("upper_bound").get<double>();
    t.lower_bound = m.value("lower_bound", 0.0);
    t.seed = m.value("seed", std::uint64_t{0});
    if (m.contains("heuristic")) t.heuristic = envs::parse_heuristic(m.at("heuristic").get<std::string>());
    if (m.contains("file")) t.params = nn::load_checkpoint(dir / m.at("file").get<std::string>());
    if (!(t.upper_bound > t.lower_bound)) throw std::runtime_error("suite member " + t.name + ": empty return range");
    suite.push_back(std::move(t));
  }
  return suite;
}

namespace {

double percentile(std::vector<double>& v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * static_cast<double>(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

double normalized(const TeammateResult& t, double raw) { return std::max(raw, 0.0) / t.upper_bound; }

}  // namespace

void aggregate(EvalReport& report, int resamples, const Rng& rng) {
  if (report.teammates.empty()) throw std::invalid_argument("aggregate: empty report");
  double total = 0.0;
  for (auto& t : report.teammates) {
    if (t.returns.empty()) throw std::invalid_argument("aggregate: teammate " + t.name + " has no episodes");
    double s = 0.0;
    for (double r : t.returns) s += r;
    t.raw_mean = s / static_cast<double>(t.returns.size());
    t.normalized_mean = normalized(t, t.raw_mean);
    total += t.normalized_mean;
  }
  report.normalized_mean = total / static_cast<double>(report.teammates.size());
  if (resamples <= 0) {
    report.ci_low = report.ci_high = report.normalized_mean;
    for (auto& t : report.teammates) t.ci_low = t.ci_high = t.normalized_mean;
    return;
  }
  const std::size_t k = report.teammates.size();
  std::vector<std::vector<double>> per(k, std::vector<double>(static_cast<std::size_t>(resamples)));
  std::vector<double> agg(static_cast<std::size_t>(resamples));
  for (int b = 0; b < resamples; ++b) {
    Rng r = rng.derive("resample", static_cast<std::uint64_t>(b));
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const auto& t = report.teammates[i];
      const std::size_t n = t.returns.size();
      double s = 0.0;
      for (std::size_t e = 0; e < n; ++e) s += t.returns[r.uniform_index(n)];
      const double v = normalized(t, s / static_cast<double>(n));
      per[i][static_cast<std::size_t>(b)] = v;
      sum += v;
    }
    agg[static_cast<std::size_t>(b)] = sum / static_cast<double>(k);
  }
  for (std::size_t i = 0; i < k; ++i) {
    report.teammates[i].ci_low = percentile(per[i], 0.025);
    report.teammates[i].ci_high = percentile(per[i], 0.975);
  }
  report.ci_low = percentile(agg, 0.025);
  report.ci_high = percentile(agg, 0.975);
}

EvalReport evaluate_ego(const nn::ParamSet& ego, const EvalSuite& suite, const Environment& env,
                        const EvalOptions& opts) {
  if (suite.empty()) throw std::invalid_argument("evaluate_ego: empty suite");
  if (opts.episodes < 1) throw std::invalid_argument("evaluate_ego: episodes must be >= 1");
  const Rng rng(opts.seed);
  EvalReport report;
  report.seed = opts.seed;
  report.episodes = opts.episodes;
  report.checkpoint = opts.checkpoint;
  report.env = env.descriptor().name;
  for (std::size_t i = 0; i < suite.size(); ++i) {
    const auto& member = suite[i];
    auto tm = member.make_policy();
    auto actor = agents::make_policy(ego);
    std::unique_ptr<Policy> greedy;
    Policy* ego_policy = actor.get();
    if (opts.greedy) {
      greedy = std::make_unique<GreedyPolicy>(*actor);
      ego_policy = greedy.get();
    }
    const auto res = rollout(env, *ego_policy, *tm, StartSpec::initial(), opts.episodes, rng.derive("teammate", i),
                             {Mode::XP, false});
    TeammateResult t;
    t.name = member.name;
    t.kind = member.kind;
    t.upper_bound = member.upper_bound;
    for (const auto& ep : res.batch.episodes) {
      double r = 0.0;
      for (const auto& tr : ep) r += tr.raw_reward;
      t.returns.push_back(r);
    }
    report.teammates.push_back(std::move(t));
  }
  aggregate(report, opts.bootstrap_resamples, rng.derive("bootstrap"));
  return report;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& t : teammates)
    rows.push_back({{"name", t.name},
                    {"kind", to_string(t.kind)},
                    {"upper_bound", t.upper_bound},
                    {"raw_mean", t.raw_mean},
                    {"normalized_mean", t.normalized_mean},
                    {"ci_low", t.ci_low},
                    {"ci_high", t.ci_high},
                    {"returns", t.returns}});
  return {{"schema", kReportSchema},
          {"aggregate", {{"normalized_mean", normalized_mean}, {"ci_low", ci_low}, {"ci_high", ci_high}}},
          {"teammates", rows},
          {"metadata", {{"seed", seed}, {"episodes", episodes}, {"checkpoint", checkpoint}, {"env", env}}}};
}

EvalReport EvalReport::from_json(const nlohmann::json& j) {
  if (j.at("schema").get<int>() != kReportSchema) throw std::runtime_error("report: unsupported schema");
  EvalReport r;
  const auto& a = j.at("aggregate");
  r.normalized_mean = a.at("normalized_mean").get<double>();
  r.ci_low = a.at("ci_low").get<double>();
  r.ci_high = a.at("ci_high").get<double>();
  const auto& m = j.at("metadata");
  r.seed = m.at("seed").get<std::uint64_t>();
  r.episodes = m.at("episodes").get<int>();
  r.checkpoint = m.at("checkpoint").get<std::string>();
  r.env = m.at("env").get<std::string>();
  for (const auto& row : j.at("teammates")) {
    TeammateResult t;
    t.name = row.at("name").get<std::string>();
    t.kind = parse_teammate_kind(row.at("kind").get<std::string>());
    t.upper_bound = row.at("upper_bound").get<double>();
    t.raw_mean = row.at("raw_mean").get<double>();
    t.normalized_mean = row.at("normalized_mean").get<double>();
    t.ci_low = row.at("ci_low").get<double>();
    t.ci_high = row.at("ci_high").get<double>();
    t.returns = row.at("returns").get<std::vector<double>>();
    r.teammates.push_back(std::move(t));
  }
  return r;
}

void emit_report(const EvalReport& report, const fs::path& dir) {
  for (const auto& t : report.teammates)
    if (t.normalized_mean < 0.0) throw std::invalid_argument("emit_report: negative normalized mean for " + t.name);
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream js(dir / "report.json");
  if (!js) throw std::runtime_error("cannot write " + (dir / "report.json").string());
  js << report.to_json().dump(2) << '\n';
  std::ofstream csv(dir / "per_teammate.csv");
  if (!csv) throw std::runtime_error("cannot write " + (dir / "per_teammate.csv").string());
  csv << "name,kind,raw_mean,normalized_mean,ci_low,ci_high\n";
  csv.precision(17);
  for (const auto& t : report.teammates)
    csv << t.name << ',' << to_string(t.kind) << ',' << t.raw_mean << ',' << t.normalized_mean << ',' << t.ci_low << ','
        << t.ci_high << '\n';
}

}  // namespace aht::eval
