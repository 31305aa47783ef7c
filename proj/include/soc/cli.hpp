#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>

#include "soc/config.hpp"
#include "soc/hjb.hpp"
#include "soc/policy.hpp"

namespace soc {

// Entry point of the `soc` tool. Returns the process exit status.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

void write_hjb_csv(const std::filesystem::path& path, const HjbSolution& solution);
// Rebuilds the reference policy from the s and u_opt columns of hjb_solution.csv.
HjbPolicy load_reference(const std::filesystem::path& path);

}  // namespace soc
