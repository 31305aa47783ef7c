#pragma once

#include <filesystem>
#include <iosfwd>

#include "soc/neural.hpp"

namespace soc {

// Text checkpoint of an Mlp<double>:
//
//   soc-mlp 1
//   layer_dims 1 32 32 1
//   weights 0 32 1        followed by 32 rows of 1 value
//   bias 0 32             followed by one row of 32 values
//   ...                   remaining layers in order
//
// Values are written as shortest round-trip decimals, so load(save(net))
// reproduces every parameter bit-exactly.
void write_mlp(std::ostream& out, const Mlp<double>& net);
Mlp<double> read_mlp(std::istream& in);

void save_mlp(const std::filesystem::path& path, const Mlp<double>& net);
Mlp<double> load_mlp(const std::filesystem::path& path);

}  // namespace soc
