#include "aht/cli/commands.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "aht/nn/checkpoint.hpp"

namespace aht::cli {

namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + p.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << text;
}

void print_progress(std::ostream& log, const nlohmann::json& line, int total) {
  log << "iteration " << line.at("iteration").get<int>() << "/" << total << " env_steps "
      << line.at("env_steps").get<long>() << " buffer " << line.value("buffer_size", 0) << " ego_return "
      << std::fixed << std::setprecision(4) << line.at("ego").value("mean_return", 0.0) << std::defaultfloat << "\n"
      << std::flush;
}

open_ended::TeammateGenerator minimax_generator(const baselines::MinimaxConfig& mc) {
  return [mc](Policy& ego, const Environment& env, const Rng& rng) {
    long steps = 0;
    auto params = baselines::minimax_teammate(ego, env, mc, rng, &steps);
    return open_ended::GeneratedTeammate{std::move(params), {{"mode", "minimax"}, {"updates", mc.updates}}, steps};
  };
}

// Snapshot of a run directory must match the resolved config; a rerun with
// the same config resumes.
void prepare_run_dir(const fs::path& dir, const std::string& snapshot) {
  fs::create_directories(dir);
  const fs::path snap = dir / "config.snapshot";
  if (fs::exists(snap) && read_file(snap) != snapshot)
    throw ConfigError("run directory " + dir.string() + " holds a different config.snapshot");
  write_file(snap, snapshot);
}

fs::path default_eval_dir(const fs::path& ckpt) {
  const fs::path parent = ckpt.parent_path();
  if (parent.filename() == "ego") return parent.parent_path() / "eval";
  return parent / "eval";
}

// Finds report.json for a run directory, eval directory or file argument.
fs::path locate_report(const fs::path& p) {
  if (fs::is_regular_file(p)) return p;
  for (const fs::path& c : {p / "report.json", p / "eval" / "report.json"})
    if (fs::exists(c)) return c;
  throw std::runtime_error("no report.json under " + p.string());
}

std::string algorithm_for(const fs::path& report) {
  for (fs::path d = report.parent_path(); !d.empty(); d = d.parent_path()) {
    if (fs::exists(d / "config.snapshot")) return load_config(d / "config.snapshot").algorithm;
    if (d == d.parent_path() || d.filename() != "eval") break;
  }
  return "unknown";
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

ppo::RecurrentLearner train_on_population(const open_ended::OpenEndedConfig& cfg,
                                          const open_ended::PopulationBuffer& population, const Environment& env,
                                          const Rng& rng, const fs::path& run_dir, std::ostream& log) {
  cfg.validate();
  const auto& desc = env.descriptor();
  Rng init = rng.derive("ego_init");
  auto ego = ppo::RecurrentLearner::create(desc.obs_dim, desc.num_actions, cfg.ego_embed, cfg.ego_hidden, cfg.ego_head,
                                           init);
  fs::create_directories(run_dir / "ego");
  std::ofstream diag(run_dir / "diagnostics.jsonl", std::ios::trunc);
  long steps = 0;
  for (int it = 1; it <= cfg.iterations; ++it) {
    const auto es = open_ended::ego_update(ego, population, env, cfg,
                                           rng.derive("iteration", static_cast<std::uint64_t>(it)).derive("ego"), steps);
    steps += es.env_steps;
    nlohmann::json line{{"iteration", it},
                        {"env_steps", steps},
                        {"buffer_size", population.size()},
                        {"ego", {{"mean_return", es.mean_return}, {"env_steps", es.env_steps}, {"sampled", es.sampled}}}};
    nn::save_checkpoint(open_ended::ego_checkpoint_path(run_dir, it), ego.net);
    diag << line.dump() << '\n' << std::flush;
    print_progress(log, line, cfg.iterations);
  }
  return ego;
}

fs::path train(const RunConfig& cfg_in, std::ostream& log) {
  RunConfig cfg = cfg_in;
  cfg.finalize();
  const fs::path dir = cfg.out_dir;
  prepare_run_dir(dir, serialize(cfg));
  const auto env = make_env(cfg);
  const Rng rng(cfg.seed);
  const Algorithm alg = cfg.algorithm_id();
  const auto progress = [&](const nlohmann::json& line) { print_progress(log, line, cfg.open_ended.iterations); };

  nn::ParamSet final_ego;
  switch (alg) {
    case Algorithm::rotate:
    case Algorithm::rotate_traj:
    case Algorithm::rotate_gae:
    case Algorithm::rotate_mp:
    case Algorithm::rotate_nobuffer:
    case Algorithm::minimax: {
      const auto gen = alg == Algorithm::minimax ? minimax_generator(cfg.minimax) : open_ended::TeammateGenerator{};
      auto res = open_ended::open_ended_train(cfg.open_ended, *env, rng, dir, gen, progress);
      final_ego = res.ego.net;
      break;
    }
    case Algorithm::fcp:
    case Algorithm::brdiv: {
      const Rng pop_rng = rng.derive("population");
      const auto pop = alg == Algorithm::fcp
                           ? baselines::fcp_population(*env, cfg.fcp.seeds, cfg.fcp.checkpoints, cfg.ippo, pop_rng)
                           : baselines::brdiv_population(*env, cfg.brdiv, pop_rng);
      baselines::write_manifest(dir / "teammates", pop, cfg.algorithm, {{"seed", cfg.seed}});
      log << "population " << pop.size() << " members\n" << std::flush;
      final_ego = train_on_population(cfg.open_ended, pop, *env, rng.derive("ego"), dir, log).net;
      break;
    }
    case Algorithm::ippo: {
      fs::create_directories(dir / "ego");
      std::ofstream diag(dir / "diagnostics.jsonl", std::ios::trunc);
      auto res = baselines::ippo_train(*env, cfg.ippo, rng, [&](const baselines::IppoResult& r, long update) {
        const auto& p = r.curve.back();
        diag << nlohmann::json{{"update", update}, {"env_steps", p.env_steps}, {"mean_return", p.mean_return}}.dump()
             << '\n';
        if (update % 50 == 0) log << "update " << update << " env_steps " << p.env_steps << " return " << p.mean_return << "\n";
      });
      fs::create_directories(dir / "teammates");
      nn::save_checkpoint(dir / "teammates" / "partner.ckpt", res.agent1.actor);
      final_ego = res.agent0.actor;
      break;
    }
  }
  const fs::path out = dir / "ego" / "final.ckpt";
  nn::save_checkpoint(out, final_ego);
  log << "final checkpoint " << out.string() << "\n";
  return out;
}

eval::EvalReport evaluate_checkpoint(const fs::path& ckpt, const fs::path& suite_dir, RunConfig cfg) {
  std::string env_name;
  const auto suite = eval::load_suite(suite_dir, &env_name);
  cfg.env = env_name;
  cfg.finalize();
  const auto env = make_env(cfg);
  eval::EvalOptions opts;
  opts.episodes = cfg.eval.episodes;
  opts.greedy = cfg.eval.greedy;
  opts.bootstrap_resamples = cfg.eval.bootstrap_resamples;
  opts.seed = cfg.seed;
  opts.checkpoint = ckpt.string();
  auto report = eval::evaluate_ego(nn::load_checkpoint(ckpt), suite, *env, opts);
  report.env = env_name;
  return report;
}

std::string merge_reports(const std::vector<fs::path>& inputs) {
  std::string out = "algorithm,run,teammate,kind,raw_mean,normalized_mean,ci_low,ci_high\n";
  for (const auto& in : inputs) {
    const fs::path path = locate_report(in);
    std::ifstream f(path);
    const auto report = eval::EvalReport::from_json(nlohmann::json::parse(f));
    const std::string alg = csv_field(algorithm_for(path));
    const std::string run = csv_field(in.string());
    for (const auto& t : report.teammates) {
      out += alg + "," + run + "," + csv_field(t.name) + "," + eval::to_string(t.kind) + "," + num(t.raw_mean) + "," +
             num(t.normalized_mean) + "," + num(t.ci_low) + "," + num(t.ci_high) + "\n";
    }
    out += alg + "," + run + ",aggregate,all,," + num(report.normalized_mean) + "," + num(report.ci_low) + "," +
           num(report.ci_high) + "\n";
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Ad hoc teamwork training and evaluation"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 0;
  int workers = 0;
  std::string out;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "TOML-style config file")->check(CLI::ExistingFile);
    sub->add_option("--set", overrides, "key=value override (repeatable)");
    sub->add_option("--seed", seed, "run seed");
    sub->add_option("--workers", workers, "worker threads (0: logical cores)")->check(CLI::NonNegativeNumber);
  };

  auto* train_cmd = app.add_subcommand("train", "train the configured algorithm");
  common(train_cmd);
  train_cmd->add_option("--out", out, "run directory");

  std::string ckpt, suite_dir;
  int episodes = 0;
  bool greedy = false;
  auto* eval_cmd = app.add_subcommand("eval", "score a checkpoint against a suite");
  common(eval_cmd);
  eval_cmd->add_option("--ckpt", ckpt, "ego checkpoint")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--suite", suite_dir, "suite directory")->required()->check(CLI::ExistingDirectory);
  eval_cmd->add_option("--episodes", episodes, "episodes per teammate")->check(CLI::PositiveNumber);
  eval_cmd->add_flag("--greedy", greedy, "argmax actions");
  eval_cmd->add_option("--out", out, "output directory");

  std::string env_id;
  auto* suite_cmd = app.add_subcommand("suite", "build and save an evaluation suite");
  common(suite_cmd);
  suite_cmd->add_option("--env", env_id, "environment id");
  suite_cmd->add_option("--out", out, "suite directory")->required();

  std::vector<std::string> inputs;
  auto* report_cmd = app.add_subcommand("report", "merge eval reports into one CSV");
  report_cmd->add_option("inputs", inputs, "run directories or report.json files")->required();
  report_cmd->add_option("--out", out, "CSV path (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  auto resolve = [&](CLI::App* sub) {
    RunConfig cfg = config_path.empty() ? RunConfig{} : load_config(config_path);
    for (const auto& o : overrides) apply_override(cfg, o);
    if (const char* env_dir = std::getenv("AHT_RUN_DIR"); env_dir && *env_dir) cfg.out_dir = env_dir;
    if (sub->count("--seed")) cfg.seed = seed;
    if (sub->count("--workers")) cfg.workers = workers;
    return cfg;
  };

  try {
    if (train_cmd->parsed()) {
      RunConfig cfg = resolve(train_cmd);
      if (!out.empty()) cfg.out_dir = out;
      train(cfg, std::cout);
    } else if (eval_cmd->parsed()) {
      RunConfig cfg = resolve(eval_cmd);
      if (episodes > 0) cfg.eval.episodes = episodes;
      if (greedy) cfg.eval.greedy = true;
      const auto report = evaluate_checkpoint(ckpt, suite_dir, cfg);
      const fs::path dir = out.empty() ? default_eval_dir(ckpt) : fs::path(out);
      eval::emit_report(report, dir);
      std::cout << "normalized " << report.normalized_mean << " [" << report.ci_low << ", " << report.ci_high
                << "] -> " << (dir / "report.json").string() << "\n";
    } else if (suite_cmd->parsed()) {
      RunConfig cfg = resolve(suite_cmd);
      if (!env_id.empty()) cfg.env = env_id;
      cfg.finalize();
      const auto env = make_env(cfg);
      const auto suite = eval::build_eval_suite(*env, cfg.suite, Rng(cfg.seed).derive("suite"));
      eval::save_suite(out, suite, cfg.env);
      for (const auto& t : suite) std::cout << t.name << " upper_bound " << t.upper_bound << "\n";
    } else if (report_cmd->parsed()) {
      std::vector<fs::path> paths(inputs.begin(), inputs.end());
      const std::string csv = merge_reports(paths);
      if (out.empty()) {
        std::cout << csv;
      } else {
        write_file(out, csv);
      }
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}

}  // namespace aht::cli
