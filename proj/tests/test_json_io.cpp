#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "switchstab/json_io.hpp"
#include "switchstab/switchstab.hpp"

namespace ss = switchstab;
using ss::Json;
using ss::Matrix;

namespace {

std::string ConfigErrorOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const ss::ConfigError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Signal, RoundTrip) {
  const ss::SwitchingSignal sig(-1.0, 2.0, 1, {{0.0, 2}, {0.5, 1}});
  const Json j = ss::ToJson(sig);
  EXPECT_EQ(j["schema"], "switchstab/1");
  EXPECT_EQ(j["kind"], "signal");
  const auto back = ss::ParseSignal(j);
  EXPECT_EQ(back.switches(), sig.switches());
  EXPECT_EQ(back.t_begin(), -1.0);
  EXPECT_EQ(back.initial_mode(), 1);
}

TEST(Signal, ErrorsNameTheField) {
  const Json bad = Json::parse(R"({"t_begin": 0, "t_end": 1, "initial_mode": 1,
                                   "switches": [[0.5, 1]]})");
  EXPECT_NE(ConfigErrorOf([&] { ss::ParseSignal(bad); }).find("signal"), std::string::npos);
  const Json missing = Json::parse(R"({"t_begin": 0, "initial_mode": 1})");
  EXPECT_NE(ConfigErrorOf([&] { ss::ParseSignal(missing); }).find("t_end"), std::string::npos);
  const Json shape = Json::parse(R"({"t_begin": 0, "t_end": 1, "initial_mode": 1,
                                     "switches": [[0.5]]})");
  EXPECT_NE(ConfigErrorOf([&] { ss::ParseSignal(shape); }).find("switches[0]"),
            std::string::npos);
}

TEST(Class, RoundTripAllKinds) {
  const ss::SetValuedMap h({{1, {2}}, {2, {1, 3}}, {3, {1}}});
  const auto spec = ss::Intersect({ss::AverageDwell{0.5, 3}, ss::Dwell{1.0},
                                   ss::Ergodic{3.0, {1, 2, 3}}, ss::GraphConstrained{h}});
  const Json j = ss::ToJson(spec);
  const auto back = ss::ParseClass(j);
  EXPECT_EQ(ss::ToJson(back).dump(), j.dump());
  ASSERT_NE(ss::GraphOf(back), nullptr);
  EXPECT_EQ(ss::GraphOf(back)->graph, h);
}

TEST(Class, UnknownTypeAndBadGraph) {
  EXPECT_NE(ConfigErrorOf([] { ss::ParseClass(Json::parse(R"({"type": "zigzag"})")); })
                .find("zigzag"),
            std::string::npos);
  EXPECT_FALSE(ConfigErrorOf([] {
                 ss::ParseClass(Json::parse(R"({"type": "graph", "graph": {"1": [2]}})"));
               }).empty());
  EXPECT_FALSE(ConfigErrorOf([] {
                 ss::ParseClass(Json::parse(R"({"type": "graph", "graph": {"x": []}})"));
               }).empty());
}

TEST(System, BuiltinAndExplicit) {
  EXPECT_EQ(ss::ParseSystem(Json::parse(R"({"builtin": "decoupled"})")).modes().size(), 2u);
  EXPECT_FALSE(ConfigErrorOf([] { ss::ParseSystem(Json::parse(R"({"builtin": "x"})")); }).empty());
  const auto sys = ss::ParseSystem(Json::parse(R"({
    "dimension": 2,
    "modes": [
      {"id": 1, "linear": {"A": [[-1, 0], [0, 0]]}},
      {"id": 2, "linear": {"A": [0, 0, 0, -1]},
       "domain": {"halfspaces": [[1, 0, 0]], "box": 3}}
    ]})"));
  ASSERT_EQ(sys.modes().size(), 2u);
  EXPECT_DOUBLE_EQ((*sys.mode(1).linear)(0, 0), -1.0);
  EXPECT_DOUBLE_EQ((*sys.mode(2).linear)(1, 1), -1.0);
  ss::Vector x(2);
  x << -1.0, 0.0;
  EXPECT_FALSE(sys.mode(2).domain.Contains(x));
  EXPECT_TRUE(sys.mode(1).domain.Contains(x));
}

TEST(System, DimensionMismatchReported) {
  const std::string msg = ConfigErrorOf([] {
    ss::ParseSystem(Json::parse(R"({"modes": [{"linear": {"A": [[1, 0], [0, 1]]}},
                                              {"linear": {"A": [[1]]}}]})"));
  });
  EXPECT_NE(msg.find("modes[1]"), std::string::npos);
}

TEST(Pair, QuadraticFromJson) {
  const auto pair = ss::ParseQuadraticPair(
      Json::parse(R"({"P": [[[1,0],[0,1]], [[2,0],[0,2]]], "C": [[[1,0]], [[0,1]]]})"), 2);
  EXPECT_EQ(pair.modes().size(), 2u);
  EXPECT_DOUBLE_EQ(pair.p[1](0, 0), 2.0);
  EXPECT_FALSE(ConfigErrorOf([] {
                 ss::ParseQuadraticPair(Json::parse(R"({"P": [[[1,0],[0,0]]], "C": [[[1,0]]]})"),
                                        2);
               }).empty());
}

TEST(Reports, CertificateSerialization) {
  const Matrix eye = Matrix::Identity(2, 2);
  Matrix a1 = Matrix::Zero(2, 2), a2 = Matrix::Zero(2, 2);
  a1(0, 0) = -1;
  a2(1, 1) = -1;
  Matrix c1(1, 2), c2(1, 2);
  c1 << 1, 0;
  c2 << 0, 1;
  const Json j = ss::ToJson(ss::CheckCorollaryFinal({a1, a2}, {eye, eye}, {c1, c2}, true));
  EXPECT_EQ(j["kind"], "certificate");
  EXPECT_EQ(j["verdict"], "Certified");
  EXPECT_EQ(j["predicted_limit"]["kind"], "origin");
  ASSERT_TRUE(j["hypotheses"].is_array());
  for (const auto& h : j["hypotheses"]) {
    EXPECT_EQ(h["status"], "holds");
    EXPECT_TRUE(h.contains("name"));
  }
  // Key order is stable, so dumps are byte-identical across runs.
  EXPECT_EQ(j.begin().key(), "schema");
}

TEST(Reports, ValidationSerialization) {
  const ss::SwitchingSignal sig(0, 3, 1, {{0.5, 2}, {1.0, 1}});
  const Json j = ss::ToJson(ss::Validate(sig, ss::AverageDwell{1.0, 1}));
  EXPECT_EQ(j["kind"], "validation");
  EXPECT_FALSE(j["passed"].get<bool>());
  EXPECT_TRUE(j.contains("switch_indices"));
}

TEST(ReadJsonFile, SyntaxErrorHasLineAndColumn) {
  const std::string path = ::testing::TempDir() + "broken.json";
  {
    std::ofstream out(path);
    out << "{\n  \"a\": 1,\n  \"b\": ]\n}\n";
  }
  const std::string msg = ConfigErrorOf([&] { ss::ReadJsonFile(path); });
  EXPECT_NE(msg.find(path + ":3:"), std::string::npos) << msg;
  std::remove(path.c_str());
  EXPECT_FALSE(ConfigErrorOf([] { ss::ReadJsonFile("/nonexistent/x.json"); }).empty());
}
