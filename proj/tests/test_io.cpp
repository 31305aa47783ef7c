#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include "soc/checkpoint.hpp"
#include "soc/config.hpp"
#include "soc/csv.hpp"
#include "soc/rng.hpp"

using namespace soc;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "soc_test_io";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("numbers round-trip through text") {
  Engine rng = make_stream(1, StreamTag::kInit);
  std::normal_distribution<double> normal(0, 1e3);
  for (int i = 0; i < 1000; ++i) {
    const double x = normal(rng) * std::pow(10.0, (i % 40) - 20);
    CHECK(parse_number(format_number(x)) == x);
  }
  CHECK(format_number(0.5) == "0.5");
  CHECK(format_number(std::int64_t{-42}) == "-42");
  CHECK(format_number(1e-300) == "1e-300");
  CHECK(std::isinf(parse_number(format_number(std::numeric_limits<double>::infinity()))));
  CHECK(std::isnan(parse_number(format_number(std::nan("")))));
  CHECK_THROWS(parse_number("1.5x"));
  CHECK_THROWS(parse_number(""));
}

TEST_CASE("csv write and read") {
  const auto path = scratch("table.csv");
  {
    CsvWriter w(path, {"name", "x", "n"});
    w.row("a", 0.1, 3);
    w.row(std::string("b"), -2.5e-7, std::int64_t{9});
  }
  std::ifstream in(path);
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == "name,x,n\na,0.1,3\nb,-2.5e-07,9\n");

  const auto table = read_csv(path);
  CHECK(table.header == std::vector<std::string>{"name", "x", "n"});
  CHECK(table.numbers("x") == std::vector<double>{0.1, -2.5e-7});
  CHECK(table.column("n") == 2);
  CHECK_THROWS(table.column("missing"));
  CHECK_THROWS(read_csv(scratch("does_not_exist.csv")));
}

TEST_CASE("checkpoints restore parameters bit-exactly") {
  Engine rng = make_stream(2, StreamTag::kInit);
  auto net = init_params<double>(MlpSpec{{2, 7, 3, 1}}, 1e-3, rng);
  net.params()(0) = std::nextafter(1.0, 2.0);
  net.params()(1) = -0.0;
  std::stringstream buf;
  write_mlp(buf, net);
  const auto back = read_mlp(buf);
  CHECK(back.spec() == net.spec());
  for (Eigen::Index i = 0; i < net.num_params(); ++i)
    CHECK(std::memcmp(&back.params()(i), &net.params()(i), sizeof(double)) == 0);

  const auto path = scratch("net.mlp");
  save_mlp(path, net);
  CHECK(load_mlp(path).params() == net.params());

  std::stringstream bad("soc-mlp 2\n");
  CHECK_THROWS(read_mlp(bad));
  std::string text = buf.str();
  std::stringstream truncated(text.substr(0, text.size() / 2));
  CHECK_THROWS(read_mlp(truncated));
}

TEST_CASE("settings registry") {
  Settings s;
  CHECK(s.number("env.beta") == 1.0);
  CHECK(s.number("env.dt") == 0.005);
  CHECK(s.integer("hjb.n") == 4001);
  CHECK(s.dims("reinforce.hidden") == std::vector<Eigen::Index>{32, 32});
  CHECK(s.number("td3.sigma_expl") == 1.0);
  CHECK(s.integer("eval.k_test") == 1000);

  try {
    s.set("env.temperature", "3");
    FAIL("unknown key accepted");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("env.beta") != std::string::npos);
  }
  s.set("env.beta", "4");
  CHECK(s.number("env.beta") == 4.0);
  s.set("env.alpha", "abc");
  CHECK_THROWS_AS(s.number("env.alpha"), ConfigError);
  s.set("td3.episodes", "2.5");
  CHECK_THROWS_AS(s.integer("td3.episodes"), ConfigError);
}

TEST_CASE("settings file round-trip") {
  std::stringstream in("# comment\n[env]\nbeta = 4   # colder\n\n[td3]\nsigma_expl=0.5\n");
  Settings s;
  s.load(in);
  CHECK(s.number("env.beta") == 4.0);
  CHECK(s.number("td3.sigma_expl") == 0.5);

  std::stringstream out;
  s.write(out);
  Settings t;
  t.load(out);
  for (const auto& info : Settings::registry()) CHECK(t.get(info.key) == s.get(info.key));

  std::stringstream unknown("[env]\ngamma = 1\n");
  CHECK_THROWS_AS(Settings().load(unknown), ConfigError);
  std::stringstream orphan("beta = 1\n");
  CHECK_THROWS_AS(Settings().load(orphan), ConfigError);
  std::stringstream garbage("[env]\nbeta\n");
  CHECK_THROWS_AS(Settings().load(garbage), ConfigError);
}

TEST_CASE("typed configurations from settings") {
  Settings s;
  s.set("env.beta", "4");
  s.set("td3.sigma_expl", "0.5");
  s.set("reinforce.batch_size", "200");
  const auto rc = make_reinforce_config(s);
  CHECK(rc.env.beta == 4.0);
  CHECK(rc.batch_size == 200);
  const auto tc = make_td3_config(s);
  CHECK(tc.env.beta == 4.0);
  CHECK(tc.sigma_expl == 0.5);
  CHECK(tc.env.max_episode_steps == 1000);
  CHECK(tc.buffer_capacity == 1'000'000);
  CHECK(make_grid(s).n == 4001);
  s.set("env.dt", "-1");
  CHECK_THROWS(make_reinforce_config(s));
}
