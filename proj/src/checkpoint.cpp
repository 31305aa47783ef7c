#include "soc/checkpoint.hpp"

#include <fstream>
#include <istream>
#include <sstream>
#include <ostream>
#include <stdexcept>
#include <string>

#include "soc/csv.hpp"

namespace soc {

namespace {

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word) throw std::runtime_error("checkpoint: expected '" + word + "', got '" + got + "'");
}

Eigen::Index read_index(std::istream& in) {
  long long v = 0;
  if (!(in >> v)) throw std::runtime_error("checkpoint: expected an integer");
  return static_cast<Eigen::Index>(v);
}

double read_value(std::istream& in) {
  std::string token;
  if (!(in >> token)) throw std::runtime_error("checkpoint: truncated parameter list");
  return parse_number(token);
}

}  // namespace

void write_mlp(std::ostream& out, const Mlp<double>& net) {
  out << "soc-mlp 1\nlayer_dims";
  for (auto d : net.spec().layer_dims) out << ' ' << d;
  out << '\n';
  for (Eigen::Index l = 0; l < net.num_layers(); ++l) {
    const auto w = net.weights(l);
    out << "weights " << l << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) out << (j ? " " : "") << format_number(w(i, j));
      out << '\n';
    }
    const auto b = net.bias(l);
    out << "bias " << l << ' ' << b.size() << '\n';
    for (Eigen::Index i = 0; i < b.size(); ++i) out << (i ? " " : "") << format_number(b(i));
    out << '\n';
  }
}

Mlp<double> read_mlp(std::istream& in) {
  expect(in, "soc-mlp");
  if (read_index(in) != 1) throw std::runtime_error("checkpoint: unsupported version");
  expect(in, "layer_dims");
  MlpSpec spec;
  std::string line;
  std::getline(in, line);
  {
    std::istringstream dims(line);
    long long d = 0;
    while (dims >> d) spec.layer_dims.push_back(static_cast<Eigen::Index>(d));
  }
  Mlp<double> net(spec);
  for (Eigen::Index l = 0; l < net.num_layers(); ++l) {
    auto w = net.weights(l);
    expect(in, "weights");
    if (read_index(in) != l || read_index(in) != w.rows() || read_index(in) != w.cols())
      throw std::runtime_error("checkpoint: weight block header mismatch at layer " + std::to_string(l));
    for (Eigen::Index i = 0; i < w.rows(); ++i)
      for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = read_value(in);
    auto b = net.bias(l);
    expect(in, "bias");
    if (read_index(in) != l || read_index(in) != b.size())
      throw std::runtime_error("checkpoint: bias block header mismatch at layer " + std::to_string(l));
    for (Eigen::Index i = 0; i < b.size(); ++i) b(i) = read_value(in);
  }
  return net;
}

void save_mlp(const std::filesystem::path& path, const Mlp<double>& net) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_mlp(out, net);
}

Mlp<double> load_mlp(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_mlp(in);
}

}  // namespace soc
