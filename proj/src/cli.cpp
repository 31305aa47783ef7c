#include "soc/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <vector>

#include <CLI11.hpp>

#include "soc/checkpoint.hpp"
#include "soc/csv.hpp"
#include "soc/metrics.hpp"
#include "soc/reinforce.hpp"
#include "soc/td3.hpp"

namespace fs = std::filesystem;

namespace soc {

namespace {

const std::vector<std::string> kSubcommands = {"hjb-solve", "run-reinforce", "run-td3",       "evaluate",
                                               "is-estimate", "dump-policy",  "advantage-table"};

// Flags that mirror configuration keys.
const std::vector<std::pair<std::string, std::string>> kFlagKeys = {
    {"--seed", "run.seed"},
    {"--threads", "run.threads"},
    {"--out-dir", "run.out_dir"},
    {"--alpha", "env.alpha"},
    {"--beta", "env.beta"},
    {"--dt", "env.dt"},
    {"--grid-n", "hjb.n"},
    {"--n-gradient-steps", "reinforce.n_gradient_steps"},
    {"--batch-size", "reinforce.batch_size"},
    {"--learning-rate", "reinforce.learning_rate"},
    {"--episodes", "td3.episodes"},
    {"--sigma-expl", "td3.sigma_expl"},
    {"--sigma-target", "td3.sigma_target"},
    {"--k-test", "eval.k_test"},
    {"--k", "eval.k"},
    {"--policy", "eval.policy"},
    {"--reference", "eval.reference"},
    {"--actor", "eval.actor"},
    {"--critic", "eval.critic"},
};

const std::vector<std::string> kPathKeys = {"eval.reference", "eval.actor", "eval.critic"};

struct Run {
  std::string subcommand;
  Settings settings;
  fs::path dir;
  std::ostream& out;
};

std::string format_step(std::int64_t v) {
  std::ostringstream ss;
  ss << std::setw(6) << std::setfill('0') << v;
  return ss.str();
}

fs::path make_run_dir(const Settings& s, const std::string& subcommand) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream name;
  name << subcommand << "_seed" << s.get("run.seed") << '_' << std::put_time(&tm, "%Y%m%d-%H%M%S");
  fs::path base = fs::path(s.get("run.out_dir")) / name.str();
  fs::path dir = base;
  for (int i = 1; fs::exists(dir); ++i) dir = base.string() + "-" + std::to_string(i);
  return dir;
}

Eigen::VectorXd linspace(double lb, double ub, std::int64_t n) {
  if (n < 2) throw ConfigError("grids need at least 2 points");
  return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(n), lb, ub);
}

HjbSolution solve_reference(const Settings& s) {
  return solve_bvp(make_env(s, s.integer("eval.max_episode_steps")), make_grid(s));
}

// Reference policy: the given hjb_solution.csv, or a fresh solve.
std::unique_ptr<HjbPolicy> reference_policy(const Settings& s) {
  if (!s.get("eval.reference").empty()) return std::make_unique<HjbPolicy>(load_reference(s.get("eval.reference")));
  return std::make_unique<HjbPolicy>(policy_from_solution(solve_reference(s)));
}

std::unique_ptr<Policy> resolve_policy(const Settings& s, std::string& name) {
  const std::string& spec = s.get("eval.policy");
  if (spec == "zero") {
    name = "zero";
    return std::make_unique<ZeroPolicy>();
  }
  if (spec == "hjb") {
    name = "hjb";
    return reference_policy(s);
  }
  name = fs::path(spec).stem().string();
  return std::make_unique<NetworkPolicy>(load_mlp(spec));
}

void write_snapshot(CsvWriter& csv, std::int64_t index, const Policy& policy, const Policy& reference,
                    const Eigen::VectorXd& grid) {
  const Eigen::ArrayXd s = grid.array();
  const Eigen::ArrayXd a = policy(s);
  const Eigen::ArrayXd ref = reference(s);
  for (Eigen::Index i = 0; i < s.size(); ++i) csv.row(index, s(i), a(i), ref(i));
}

void write_advantage_csv(const fs::path& path, const AdvantageTable& table) {
  CsvWriter csv(path, {"s", "a", "q_value", "advantage", "greedy_action"});
  for (Eigen::Index i = 0; i < table.states.size(); ++i)
    for (Eigen::Index j = 0; j < table.actions.size(); ++j)
      csv.row(table.states(i), table.actions(j), table.q_values(i, j), table.advantages(i, j),
              table.greedy_actions(i));
}

Eigen::VectorXd state_grid(const Settings& s) {
  return linspace(s.number("env.state_lb"), s.number("env.state_ub"), s.integer("eval.n_states"));
}

int cmd_hjb_solve(Run& run) {
  const HjbSolution sol = solve_reference(run.settings);
  write_hjb_csv(run.dir / "hjb_solution.csv", sol);
  const HjbPolicy policy = policy_from_solution(sol);
  const double s0 = run.settings.number("env.s_init");
  const auto i0 = static_cast<Eigen::Index>(std::llround((s0 - sol.grid.lb) / sol.grid.h()));
  run.out << "hjb-solve: n=" << sol.grid.n << " residual=" << sol.residual;
  if (i0 >= 0 && i0 < sol.grid.n) run.out << " psi(s_init)=" << sol.psi(i0) << " u(s_init)=" << policy.at(s0);
  run.out << '\n';
  return 0;
}

int cmd_run_reinforce(Run& run) {
  const auto& s = run.settings;
  const ReinforceConfig config = make_reinforce_config(s);
  const HjbSolution sol = solve_reference(s);
  write_hjb_csv(run.dir / "hjb_solution.csv", sol);
  const HjbPolicy reference = policy_from_solution(sol);
  const Eigen::VectorXd grid = state_grid(s);
  fs::create_directories(run.dir / "checkpoints");

  CsvWriter learning(run.dir / "reinforce_learning.csv",
                     {"step", "l2_error", "mean_return", "mean_length", "truncated_count", "batch_truncated_count"});
  CsvWriter snapshots(run.dir / "policy_snapshots.csv", {"step", "s", "action", "hjb_action"});
  ReinforceHooks hooks;
  hooks.on_test = [&](const ReinforceTestPoint& p, const Mlp<double>& net) {
    learning.row(p.step, p.l2_error, p.mean_return, p.mean_length, p.truncated_count, p.batch_truncated_count);
    write_snapshot(snapshots, p.step, NetworkPolicy(net), reference, grid);
    save_mlp(run.dir / "checkpoints" / ("policy_step_" + format_step(p.step) + ".mlp"), net);
    run.out << "step " << p.step << " l2=" << p.l2_error << " return=" << p.mean_return
            << " length=" << p.mean_length << '\n';
  };
  const ReinforceRecord record = train_reinforce(config, reference, hooks);
  save_mlp(run.dir / "policy_final.mlp", record.policy);
  return 0;
}

int cmd_run_td3(Run& run) {
  const auto& s = run.settings;
  const Td3Config config = make_td3_config(s);
  const HjbSolution sol = solve_reference(s);
  write_hjb_csv(run.dir / "hjb_solution.csv", sol);
  const HjbPolicy reference = policy_from_solution(sol);
  const Eigen::VectorXd grid = state_grid(s);
  fs::create_directories(run.dir / "checkpoints");

  CsvWriter learning(run.dir / "td3_learning.csv", {"episode", "l2_error", "return", "length", "truncated_count"});
  CsvWriter snapshots(run.dir / "policy_snapshots.csv", {"episode", "s", "action", "hjb_action"});
  Td3Hooks hooks;
  hooks.on_test = [&](const Td3TestPoint& p, const ActorCriticState& state) {
    learning.row(p.episode, p.l2_error, p.mean_return, p.mean_length, p.truncated_count);
    write_snapshot(snapshots, p.episode, greedy_policy(state, config), reference, grid);
    const std::string tag = format_step(p.episode);
    save_mlp(run.dir / "checkpoints" / ("actor_episode_" + tag + ".mlp"), state.actor);
    save_mlp(run.dir / "checkpoints" / ("critic1_episode_" + tag + ".mlp"), state.critic1);
    run.out << "episode " << p.episode << " l2=" << p.l2_error << " return=" << p.mean_return
            << " length=" << p.mean_length << '\n';
  };
  const Td3Record record = train_td3(config, reference, hooks);

  std::vector<double> returns;
  for (const auto& e : record.episodes) returns.push_back(e.episode_return);
  const auto smoothed = running_mean(returns, static_cast<std::size_t>(s.integer("td3.running_mean_window")));
  CsvWriter episodes(run.dir / "td3_episodes.csv", {"episode", "return", "length", "running_mean_return"});
  for (std::size_t i = 0; i < record.episodes.size(); ++i)
    episodes.row(record.episodes[i].episode, record.episodes[i].episode_return, record.episodes[i].length,
                 smoothed[i]);

  save_mlp(run.dir / "actor_final.mlp", record.state.actor);
  save_mlp(run.dir / "critic1_final.mlp", record.state.critic1);
  save_mlp(run.dir / "critic2_final.mlp", record.state.critic2);
  const Eigen::VectorXd actions =
      linspace(config.action_low, config.action_high, s.integer("eval.n_actions"));
  write_advantage_csv(run.dir / "advantage_table.csv", advantage_diagnostic(record.state, grid, actions));
  return 0;
}

int cmd_evaluate(Run& run) {
  const auto& s = run.settings;
  if (s.get("eval.reference").empty())
    throw ConfigError("evaluate needs a reference solution: run `soc hjb-solve` and pass --reference <hjb_solution.csv>");
  if (!fs::exists(s.get("eval.reference")))
    throw ConfigError("reference solution " + s.get("eval.reference") +
                      " not found: run `soc hjb-solve` first and pass its hjb_solution.csv");
  const HjbPolicy reference = load_reference(s.get("eval.reference"));
  std::string name;
  const auto policy = resolve_policy(s, name);
  const EnvConfig env = make_env(s, s.integer("eval.max_episode_steps"));
  const StreamFamily streams{static_cast<std::uint64_t>(s.integer("run.seed")), StreamTag::kEvaluation, 0};
  const EvalReport r = evaluate_policy(*policy, reference, env, s.integer("eval.k_test"), streams,
                                       static_cast<std::size_t>(s.integer("run.threads")));
  CsvWriter csv(run.dir / "evaluation.csv",
                {"policy_name", "l2_error", "mean_return", "mean_length", "truncated_count", "k_test"});
  csv.row(name, r.l2_error, r.mean_return, r.mean_length, r.truncated_count, r.k);
  run.out << "evaluate " << name << ": l2=" << r.l2_error << " return=" << r.mean_return
          << " length=" << r.mean_length << '\n';
  return 0;
}

int cmd_is_estimate(Run& run) {
  const auto& s = run.settings;
  std::string name;
  const auto policy = resolve_policy(s, name);
  const EnvConfig env = make_env(s, s.integer("eval.max_episode_steps"));
  const StreamFamily streams{static_cast<std::uint64_t>(s.integer("run.seed")), StreamTag::kEstimator, 0};
  const IsReport r =
      is_estimate(*policy, env, s.integer("eval.k"), streams, static_cast<std::size_t>(s.integer("run.threads")));
  CsvWriter csv(run.dir / "is_estimate.csv", {"policy_name", "mean", "sample_variance", "relative_error",
                                              "mean_hitting_time", "k", "truncated_count"});
  csv.row(name, r.mean, r.sample_variance, r.relative_error, r.mean_hitting_time, r.k, r.truncated_count);
  run.out << "is-estimate " << name << ": mean=" << r.mean << " +- " << r.standard_error()
          << " relative_error=" << r.relative_error << '\n';
  return 0;
}

int cmd_dump_policy(Run& run) {
  const auto& s = run.settings;
  std::string name;
  const auto policy = resolve_policy(s, name);
  const auto reference = reference_policy(s);
  {
    CsvWriter csv(run.dir / "policy.csv", {"s", "action", "hjb_action"});
    const Eigen::ArrayXd grid = state_grid(s).array();
    const Eigen::ArrayXd a = (*policy)(grid);
    const Eigen::ArrayXd ref = (*reference)(grid);
    for (Eigen::Index i = 0; i < grid.size(); ++i) csv.row(grid(i), a(i), ref(i));
  }
  const EnvConfig env = make_env(s, s.integer("eval.max_episode_steps"));
  Engine rng = make_stream(static_cast<std::uint64_t>(s.integer("run.seed")), StreamTag::kRollout);
  const Trajectory traj = sample_trajectory(*policy, env, rng);
  CsvWriter csv(run.dir / "trajectory.csv", {"step", "time", "state", "action", "reward", "done"});
  csv.row(std::int64_t{0}, 0.0, env.s_init, std::string(), std::string(), std::int64_t{0});
  for (std::size_t t = 0; t < traj.transitions.size(); ++t) {
    const auto& tr = traj.transitions[t];
    const auto step = static_cast<std::int64_t>(t + 1);
    csv.row(step, static_cast<double>(step) * env.dt, tr.next_state, tr.action, tr.reward,
            std::int64_t{tr.done ? 1 : 0});
  }
  run.out << "dump-policy " << name << ": trajectory of " << traj.hitting_steps() << " steps"
          << (traj.truncated ? " (truncated)" : "") << '\n';
  return 0;
}

int cmd_advantage_table(Run& run) {
  const auto& s = run.settings;
  if (s.get("eval.actor").empty() || s.get("eval.critic").empty())
    throw ConfigError("advantage-table needs --actor and --critic checkpoints");
  ActorCriticState state;
  state.actor = load_mlp(s.get("eval.actor"));
  state.critic1 = load_mlp(s.get("eval.critic"));
  const Eigen::VectorXd actions =
      linspace(s.number("td3.action_low"), s.number("td3.action_high"), s.integer("eval.n_actions"));
  write_advantage_csv(run.dir / "advantage_table.csv", advantage_diagnostic(state, state_grid(s), actions));
  run.out << "advantage-table written to " << (run.dir / "advantage_table.csv").string() << '\n';
  return 0;
}

}  // namespace

void write_hjb_csv(const fs::path& path, const HjbSolution& solution) {
  CsvWriter csv(path, {"s", "psi", "phi", "u_opt"});
  for (Eigen::Index i = 0; i < solution.grid.n; ++i)
    csv.row(solution.grid.node(i), solution.psi(i), solution.phi(i), solution.u_opt(i));
}

HjbPolicy load_reference(const fs::path& path) {
  const CsvTable table = read_csv(path);
  const auto s = table.numbers("s");
  const auto u = table.numbers("u_opt");
  if (s.size() < 3) throw std::runtime_error(path.string() + ": need at least 3 grid nodes");
  const Grid grid{s.front(), s.back(), static_cast<Eigen::Index>(s.size())};
  for (std::size_t i = 0; i < s.size(); ++i)
    if (std::abs(s[i] - grid.node(static_cast<Eigen::Index>(i))) > 1e-9 * (grid.ub - grid.lb))
      throw std::runtime_error(path.string() + ": grid is not uniform");
  return HjbPolicy(grid, Eigen::Map<const Eigen::VectorXd>(u.data(), static_cast<Eigen::Index>(u.size())));
}

int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Importance sampling stochastic optimal control: HJB reference, REINFORCE and TD3"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> assignments;
  std::string run_dir;
  std::map<std::string, std::string> flag_values;
  for (const auto& name : kSubcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config_path, "configuration or manifest file");
    sub->add_option("--set", assignments, "override section.key=value (repeatable)");
    sub->add_option("--run-dir", run_dir, "exact output directory (default: <out_dir>/<subcommand>_seed<seed>_<time>)");
    for (const auto& [flag, key] : kFlagKeys) {
      sub->add_option_function<std::string>(
          flag, [&flag_values, key = key](const std::string& v) { flag_values[key] = v; }, "sets " + key);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  const std::string subcommand = app.get_subcommands().front()->get_name();
  try {
    Settings settings;
    if (!config_path.empty()) settings.load_file(config_path);
    for (const auto& a : assignments) {
      const auto eq = a.find('=');
      if (eq == std::string::npos) throw ConfigError("--set expects section.key=value, got '" + a + "'");
      settings.set(a.substr(0, eq), a.substr(eq + 1));
    }
    for (const auto& [key, value] : flag_values) settings.set(key, value);
    const std::string& recorded = settings.get("run.subcommand");
    if (!recorded.empty() && recorded != subcommand)
      throw ConfigError("configuration was recorded for '" + recorded + "', not '" + subcommand + "'");
    settings.set("run.subcommand", subcommand);
    for (const auto& key : kPathKeys)
      if (!settings.get(key).empty()) settings.set(key, fs::absolute(settings.get(key)).string());
    if (const auto& p = settings.get("eval.policy"); p != "zero" && p != "hjb")
      settings.set("eval.policy", fs::absolute(p).string());

    Run run{subcommand, settings, run_dir.empty() ? make_run_dir(settings, subcommand) : fs::path(run_dir), out};
    fs::create_directories(run.dir);
    {
      std::ofstream manifest(run.dir / "manifest.ini");
      if (!manifest) throw std::runtime_error("cannot write manifest in " + run.dir.string());
      manifest << "# Fully resolved configuration; rerun with: soc " << subcommand << " --config manifest.ini\n";
      settings.write(manifest);
    }
    out << "run directory: " << run.dir.string() << '\n';

    if (subcommand == "hjb-solve") return cmd_hjb_solve(run);
    if (subcommand == "run-reinforce") return cmd_run_reinforce(run);
    if (subcommand == "run-td3") return cmd_run_td3(run);
    if (subcommand == "evaluate") return cmd_evaluate(run);
    if (subcommand == "is-estimate") return cmd_is_estimate(run);
    if (subcommand == "dump-policy") return cmd_dump_policy(run);
    if (subcommand == "advantage-table") return cmd_advantage_table(run);
    throw ConfigError("unknown subcommand " + subcommand);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace soc
