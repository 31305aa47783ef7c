#include "soc/config.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "soc/csv.hpp"

namespace soc {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string section_of(const std::string& key) { return key.substr(0, key.find('.')); }

}  // namespace

const std::vector<SettingInfo>& Settings::registry() {
  static const std::vector<SettingInfo> keys = {
      {"run.subcommand", "", "subcommand recorded in manifests; must match the invoked one"},
      {"run.seed", "0", "master seed"},
      {"run.threads", "1", "worker threads for rollouts"},
      {"run.out_dir", "runs", "parent directory of run directories"},

      {"env.alpha", "1", "barrier height"},
      {"env.beta", "1", "inverse temperature"},
      {"env.dt", "0.005", "time step"},
      {"env.s_init", "-1", "start state"},
      {"env.target_lb", "1", "left edge of the target set"},
      {"env.state_lb", "-2", "left edge of the state domain"},
      {"env.state_ub", "2", "right edge of the state domain"},
      {"env.f", "1", "running cost"},
      {"env.g", "0", "terminal cost"},

      {"hjb.n", "4001", "grid nodes on [state_lb, state_ub]"},

      {"reinforce.batch_size", "1000", "trajectories per gradient step"},
      {"reinforce.learning_rate", "0.0005", "Adam learning rate"},
      {"reinforce.n_gradient_steps", "10000", "gradient steps"},
      {"reinforce.test_every", "100", "gradient steps between evaluations"},
      {"reinforce.max_episode_steps", "100000000", "training rollout step cap"},
      {"reinforce.hidden", "32,32", "hidden layer widths"},
      {"reinforce.init_halfwidth", "0.01", "final layer initialization half-width"},

      {"td3.episodes", "4000", "training episodes"},
      {"td3.buffer_capacity", "1000000", "replay buffer capacity"},
      {"td3.learning_starts", "10000", "steps of uniform random actions before training"},
      {"td3.batch_size", "1000", "replay batch size"},
      {"td3.actor_lr", "0.0001", "actor Adam learning rate"},
      {"td3.critic_lr", "0.0001", "critic Adam learning rate"},
      {"td3.train_every", "100", "environment steps between training phases"},
      {"td3.critic_updates", "100", "critic updates per training phase"},
      {"td3.policy_delay", "2", "critic updates per actor update"},
      {"td3.sigma_expl", "1", "exploration noise standard deviation"},
      {"td3.sigma_target", "0.2", "target policy smoothing standard deviation"},
      {"td3.polyak", "0.995", "target network averaging factor"},
      {"td3.action_low", "-5", "lower action bound"},
      {"td3.action_high", "5", "upper action bound"},
      {"td3.test_every", "100", "episodes between evaluations"},
      {"td3.max_episode_steps", "1000", "training episode step cap"},
      {"td3.hidden", "32,32", "hidden layer widths of actor and critics"},
      {"td3.actor_init_halfwidth", "0.01", "actor final layer initialization half-width"},
      {"td3.critic_init_halfwidth", "0.001", "critic final layer initialization half-width"},
      {"td3.running_mean_window", "100", "episodes in the running mean of returns"},

      {"eval.k_test", "1000", "evaluation rollouts per test point"},
      {"eval.max_episode_steps", "100000", "evaluation rollout step cap"},
      {"eval.k", "1000", "rollouts for is-estimate"},
      {"eval.policy", "hjb", "policy to evaluate: zero, hjb or a checkpoint path"},
      {"eval.reference", "", "hjb_solution.csv written by hjb-solve"},
      {"eval.actor", "", "actor checkpoint for advantage-table"},
      {"eval.critic", "", "critic checkpoint for advantage-table"},
      {"eval.n_states", "201", "state grid points for tables"},
      {"eval.n_actions", "201", "action grid points for advantage-table"},
  };
  return keys;
}

Settings::Settings() {
  for (const auto& info : registry()) values_[info.key] = info.default_value;
}

void Settings::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) {
    std::string msg = "unknown configuration key '" + key + "'; valid keys:";
    for (const auto& info : registry()) msg += "\n  " + info.key;
    throw ConfigError(msg);
  }
  it->second = value;
}

const std::string& Settings::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown configuration key '" + key + "'");
  return it->second;
}

double Settings::number(const std::string& key) const {
  try {
    return parse_number(get(key));
  } catch (const std::invalid_argument&) {
    throw ConfigError("'" + key + "' is not a number: '" + get(key) + "'");
  }
}

std::int64_t Settings::integer(const std::string& key) const {
  const double v = number(key);
  if (v != std::floor(v) || std::abs(v) > 9.0e15) throw ConfigError("'" + key + "' must be an integer");
  return static_cast<std::int64_t>(v);
}

std::vector<Eigen::Index> Settings::dims(const std::string& key) const {
  std::vector<Eigen::Index> out;
  std::stringstream ss(get(key));
  std::string item;
  while (std::getline(ss, item, ',')) {
    const double v = parse_number(trim(item));
    if (v < 1 || v != std::floor(v)) throw ConfigError("'" + key + "' must list positive integers");
    out.push_back(static_cast<Eigen::Index>(v));
  }
  return out;
}

void Settings::load_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  load(in, path.string());
}

void Settings::load(std::istream& in, const std::string& origin) {
  std::string section;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(origin + ":" + std::to_string(lineno) + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": key outside a section");
    set(section + "." + trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
}

void Settings::write(std::ostream& out) const {
  std::string current;
  for (const auto& info : registry()) {
    const std::string section = section_of(info.key);
    if (section != current) {
      out << (current.empty() ? "" : "\n") << '[' << section << "]\n";
      current = section;
    }
    out << info.key.substr(section.size() + 1) << " = " << get(info.key) << '\n';
  }
}

EnvConfig make_env(const Settings& s, std::int64_t max_episode_steps) {
  EnvConfig e;
  e.alpha = s.number("env.alpha");
  e.beta = s.number("env.beta");
  e.dt = s.number("env.dt");
  e.s_init = s.number("env.s_init");
  e.target_lb = s.number("env.target_lb");
  e.state_lb = s.number("env.state_lb");
  e.state_ub = s.number("env.state_ub");
  e.f_const = s.number("env.f");
  e.g_const = s.number("env.g");
  e.max_episode_steps = max_episode_steps;
  e.validate();
  return e;
}

Grid make_grid(const Settings& s) {
  Grid g{s.number("env.state_lb"), s.number("env.state_ub"), static_cast<Eigen::Index>(s.integer("hjb.n"))};
  g.validate();
  return g;
}

ReinforceConfig make_reinforce_config(const Settings& s) {
  ReinforceConfig c;
  c.env = make_env(s, s.integer("reinforce.max_episode_steps"));
  c.batch_size = s.integer("reinforce.batch_size");
  c.learning_rate = s.number("reinforce.learning_rate");
  c.n_gradient_steps = s.integer("reinforce.n_gradient_steps");
  c.test_every = s.integer("reinforce.test_every");
  c.k_test = s.integer("eval.k_test");
  c.eval_max_episode_steps = s.integer("eval.max_episode_steps");
  c.hidden = s.dims("reinforce.hidden");
  c.init_halfwidth = s.number("reinforce.init_halfwidth");
  c.seed = static_cast<std::uint64_t>(s.integer("run.seed"));
  c.threads = static_cast<std::size_t>(s.integer("run.threads"));
  c.validate();
  return c;
}

Td3Config make_td3_config(const Settings& s) {
  Td3Config c;
  c.env = make_env(s, s.integer("td3.max_episode_steps"));
  c.n_episodes = s.integer("td3.episodes");
  c.buffer_capacity = static_cast<std::size_t>(s.integer("td3.buffer_capacity"));
  c.learning_starts = s.integer("td3.learning_starts");
  c.batch_size = s.integer("td3.batch_size");
  c.actor_lr = s.number("td3.actor_lr");
  c.critic_lr = s.number("td3.critic_lr");
  c.train_every = s.integer("td3.train_every");
  c.critic_updates_per_train = s.integer("td3.critic_updates");
  c.policy_delay = s.integer("td3.policy_delay");
  c.sigma_expl = s.number("td3.sigma_expl");
  c.sigma_target = s.number("td3.sigma_target");
  c.polyak = s.number("td3.polyak");
  c.action_low = s.number("td3.action_low");
  c.action_high = s.number("td3.action_high");
  c.test_every = s.integer("td3.test_every");
  c.k_test = s.integer("eval.k_test");
  c.eval_max_episode_steps = s.integer("eval.max_episode_steps");
  c.hidden = s.dims("td3.hidden");
  c.actor_init_halfwidth = s.number("td3.actor_init_halfwidth");
  c.critic_init_halfwidth = s.number("td3.critic_init_halfwidth");
  c.seed = static_cast<std::uint64_t>(s.integer("run.seed"));
  c.threads = static_cast<std::size_t>(s.integer("run.threads"));
  c.validate();
  return c;
}

}  // namespace soc
