#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "soc/env.hpp"
#include "soc/hjb.hpp"
#include "soc/reinforce.hpp"
#include "soc/td3.hpp"

namespace soc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SettingInfo {
  std::string key;  // "section.name"
  std::string default_value;
  std::string help;
};

// Flat `section.key = value` settings over a fixed registry. Every key has a
// default, so an empty configuration reproduces the beta = 1 experiments.
//
// File format (INI-like):
//
//   [env]
//   beta = 4        # comments start with '#'
//
class Settings {
 public:
  Settings();

  static const std::vector<SettingInfo>& registry();

  // Throws ConfigError naming the valid keys when `key` is unknown.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  double number(const std::string& key) const;
  std::int64_t integer(const std::string& key) const;
  std::vector<Eigen::Index> dims(const std::string& key) const;

  void load_file(const std::filesystem::path& path);
  void load(std::istream& in, const std::string& origin = "<stream>");
  // Every registered key, grouped by section, in registry order.
  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::string> values_;
};

EnvConfig make_env(const Settings& settings, std::int64_t max_episode_steps);
Grid make_grid(const Settings& settings);
ReinforceConfig make_reinforce_config(const Settings& settings);
Td3Config make_td3_config(const Settings& settings);

}  // namespace soc
