#pragma once

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "soc/cli.hpp"

namespace soc::testing {

struct CliResult {
  int status = 0;
  std::string out;
  std::string err;
};

inline CliResult run_soc(std::vector<std::string> args) {
  args.insert(args.begin(), "soc");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  CliResult r;
  r.status = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Relative paths of every .csv under `dir`.
inline std::set<std::string> csv_files(const std::filesystem::path& dir) {
  std::set<std::string> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv")
      files.insert(std::filesystem::relative(e.path(), dir).string());
  return files;
}

// Empty when both directories hold the same CSV files with identical bytes;
// otherwise a description of the first difference.
inline std::string compare_csv_dirs(const std::filesystem::path& a, const std::filesystem::path& b) {
  const auto fa = csv_files(a), fb = csv_files(b);
  if (fa.empty()) return "no CSV output in " + a.string();
  if (fa != fb) return "different CSV file sets";
  for (const auto& f : fa)
    if (slurp(a / f) != slurp(b / f)) return f + " differs";
  return {};
}

}  // namespace soc::testing
