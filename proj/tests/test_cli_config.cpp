#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "cli/config.hpp"
#include "cli/output.hpp"

using namespace torsionlab;
using namespace torsionlab::cli;

namespace {

std::string message_of(const std::string& text) {
  try {
    config_from_text(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(CliParse, Scalars) {
  EXPECT_EQ(parse_vec2("1.5,-2", "--point"), (Vec2{1.5, -2}));
  EXPECT_THROW(parse_vec2("1,2,3", "--point"), ConfigError);
  EXPECT_THROW(parse_vec2("1;2", "--point"), ConfigError);
  EXPECT_THROW(parse_real("2x", "--tol"), ConfigError);
  EXPECT_EQ(parse_param("lambda=5"), (std::pair<std::string, double>{"lambda", 5.0}));
  EXPECT_THROW(parse_param("=5"), ConfigError);
  EXPECT_THROW(parse_param("lambda"), ConfigError);
  EXPECT_EQ(parse_list<int>("1,5,25", "--n-list"), (std::vector<int>{1, 5, 25}));
  EXPECT_THROW(parse_list<int>("1,2.5", "--n-list"), ConfigError);
}

TEST(CliConfig, ReadsEveryKey) {
  const RunConfig c = config_from_text(R"({
    "command": "locate",
    "system": {"name": "standard_map", "isotopy": "sequential", "params": {"lambda": 5}},
    "n": 3, "n_list": [1, 2], "x": [0.2, -0.4], "y": [1.1, 0.9],
    "scan": 128, "tol": 1e-9, "seed": 7, "jobs": 2,
    "output": {"format": "csv", "path": "out.csv"}
  })");
  EXPECT_EQ(c.command, "locate");
  EXPECT_EQ(c.system.isotopy_variant, "sequential");
  EXPECT_EQ(c.system.params.at("lambda"), 5.0);
  EXPECT_EQ(c.n, 3);
  EXPECT_EQ(c.horizons(), (std::vector<int>{1, 2}));
  EXPECT_EQ(c.y, (Vec2{1.1, 0.9}));
  EXPECT_EQ(c.scan_options().scan_count, 128);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.format, "csv");
  EXPECT_EQ(c.out, "out.csv");
  EXPECT_NO_THROW(validate(c));
}

TEST(CliConfig, DiagnosticsNameTheProblem) {
  EXPECT_NE(message_of("{\n  \"n\": 3,\n  oops\n}").find("line 3"), std::string::npos);
  EXPECT_NE(message_of(R"({"nn": 3})").find("'nn': unknown key"), std::string::npos);
  EXPECT_NE(message_of(R"({"system": {"lam": 3}})").find("system.lam"), std::string::npos);
  EXPECT_NE(message_of(R"({"n": 2.5})").find("expected an integer"), std::string::npos);
  EXPECT_NE(message_of(R"({"x": [1]})").find("expected [x, y]"), std::string::npos);
  EXPECT_NE(message_of("[1, 2]").find("object"), std::string::npos);
}

TEST(CliConfig, Validation) {
  RunConfig c;
  c.command = "torsion";
  EXPECT_NO_THROW(validate(c));
  auto rejects = [&](auto mutate) {
    RunConfig bad = c;
    mutate(bad);
    EXPECT_THROW(validate(bad), ConfigError);
  };
  rejects([](RunConfig& r) { r.command = "frobnicate"; });
  rejects([](RunConfig& r) { r.system.name = "nope"; });
  rejects([](RunConfig& r) { r.n = 0; });
  rejects([](RunConfig& r) { r.tol = 0; });
  rejects([](RunConfig& r) { r.scan = 4; });
  rejects([](RunConfig& r) { r.s_count = 63; });
  rejects([](RunConfig& r) { r.format = "xml"; });
  rejects([](RunConfig& r) { r.n_list = {3, 0}; });
}

TEST(CliOutput, RealsRoundTrip) {
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  EXPECT_EQ(std::stod(format_real(kPi)), kPi);
  EXPECT_EQ(format_real(-2.0), "-2");
  EXPECT_EQ(format_real(1.0 / 0.0), "inf");
}

TEST(CliOutput, JsonAndCsvLayout) {
  Json j;
  j["a"] = Json::array({1.5, 2});
  j["b"] = std::nan("");
  std::ostringstream os;
  write_json(os, j);
  EXPECT_EQ(os.str(), "{\n  \"a\": [1.5, 2],\n  \"b\": null\n}\n");
  CsvTable t{{"n", "value"}, {}};
  t.add({"1", "2"});
  std::ostringstream cs;
  write_csv(cs, t);
  EXPECT_EQ(cs.str(), "n,value\n1,2\n");
}
