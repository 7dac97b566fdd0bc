#include <gtest/gtest.h>

#include "deft/fusion.hpp"
#include "oracles/electre_oracle.hpp"

using namespace deft;

namespace {

ScoreVector sv(const std::string& method, std::vector<double> values, std::vector<std::string> classes = {"a", "b", "c"}) {
  return make_score_vector("r", method, classes, values);
}

std::vector<double> values(const ScoreVector& v) {
  std::vector<double> out;
  for (const auto& [c, s] : v.scores) out.push_back(s);
  return out;
}

}  // namespace

TEST(Normalize, Examples) {
  EXPECT_EQ(values(normalize_scores(sv("m", {2, 1, 1}))), (std::vector<double>{0.5, 0.25, 0.25}));
  const auto u = values(normalize_scores(sv("m", {0, 0, 0})));
  for (double x : u) EXPECT_DOUBLE_EQ(x, 1.0 / 3.0);
  const auto s = values(normalize_scores(sv("m", {-1, 0, 3})));
  EXPECT_DOUBLE_EQ(s[0], 0.0);
  EXPECT_DOUBLE_EQ(s[1], 0.2);
  EXPECT_DOUBLE_EQ(s[2], 0.8);
}

TEST(Normalize, MatchesOracle) {
  SplitMix64 rng(17);
  for (int i = 0; i < 200; ++i) {
    std::vector<double> raw(2 + rng.below(4));
    for (double& x : raw) x = rng.uniform() * 4 - 1;
    std::vector<std::string> cls;
    for (std::size_t c = 0; c < raw.size(); ++c) cls.push_back(std::string(1, char('a' + c)));
    EXPECT_EQ(values(normalize_scores(sv("m", raw, cls))), oracle::normalize(raw));
  }
}

TEST(Linear, SumsNormalizedScores) {
  const auto [winner, fused] = fuse_linear({sv("x", {0.6, 0.4}, {"a", "b"}), sv("y", {0.45, 0.55}, {"a", "b"})});
  EXPECT_EQ(winner, "a");
  EXPECT_DOUBLE_EQ(fused.scores.at("a"), 1.05);
  // Exact tie goes to the first class.
  EXPECT_EQ(fuse_linear({sv("x", {0.5, 0.5}, {"a", "b"})}).first, "a");
  EXPECT_THROW(fuse_linear({sv("x", {1, 0}, {"a", "b"}), sv("y", {1, 0}, {"a", "c"})}), Error);
}

TEST(Electre, ConcordanceBelowThreshold) {
  // Two of three methods prefer a over b: 2/3 < 0.7, so no edge either way.
  const std::vector<ScoreVector> v{sv("x", {0.5, 0.3, 0.2}), sv("y", {0.5, 0.3, 0.2}), sv("z", {0.3, 0.5, 0.2})};
  const auto rel = electre_relation(v, ElectreParams::defaults_for_difficulty());
  EXPECT_NEAR(rel.concordance.at({"a", "b"}), 2.0 / 3.0, 1e-15);
  EXPECT_FALSE(rel.outranks("a", "b"));
  EXPECT_FALSE(rel.outranks("b", "a"));
  EXPECT_TRUE(rel.outranks("a", "c"));
  EXPECT_TRUE(rel.outranks("b", "c"));
  EXPECT_EQ(rel.kernel, (std::vector<std::string>{"a", "b"}));
  // With sc = 0.6 the same votes give a singleton kernel.
  EXPECT_EQ(fuse_electre(v, ElectreParams::defaults_for_dish_type()).first, "a");
}

TEST(Electre, VetoIsInclusive) {
  // a wins two methods; the third prefers b by exactly the veto value.
  const std::vector<ScoreVector> v{sv("x", {0.5, 0.25, 0.25}), sv("y", {0.5, 0.25, 0.25}),
                                   sv("z", {0.25, 0.75, 0.0})};
  auto p = ElectreParams::defaults_for_dish_type();
  const auto rel = electre_relation(v, p);
  EXPECT_TRUE(rel.vetoed.count({"a", "b"}));
  EXPECT_FALSE(rel.outranks("a", "b"));
  p.veto_values["z"] = 0.5 + 1e-9;
  EXPECT_TRUE(electre_relation(v, p).outranks("a", "b"));
}

TEST(Electre, MatchesOracleOnRandomCases) {
  SplitMix64 rng(23);
  for (int n = 0; n < 300; ++n) {
    const std::size_t k = 2 + rng.below(3), m = 1 + rng.below(4);
    oracle::ElectreCase c;
    c.sc = double(rng.below(11)) / 10;
    ElectreParams p{{}, c.sc, {}, 1.0, 0.5};
    std::vector<std::string> cls;
    for (std::size_t j = 0; j < k; ++j) cls.push_back(std::string(1, char('a' + j)));
    std::vector<ScoreVector> vs;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> raw(k);
      for (double& x : raw) x = double(rng.below(5));
      const auto nv = normalize_scores(sv("m" + std::to_string(i), raw, cls));
      c.n.push_back(values(nv));
      c.weight.push_back(1.0 + double(rng.below(3)));
      c.veto.push_back(double(rng.below(5)) / 4);
      p.method_weights[nv.method_id] = c.weight.back();
      p.veto_values[nv.method_id] = c.veto.back();
      vs.push_back(nv);
    }
    const auto want = oracle::electre(c);
    const auto [decision, rel] = fuse_electre(vs, p);
    for (std::size_t a = 0; a < k; ++a)
      for (std::size_t b = 0; b < k; ++b) EXPECT_EQ(rel.outranks(cls[a], cls[b]), bool(want.outranks[a][b]));
    std::vector<std::string> kernel;
    for (auto i : want.kernel) kernel.push_back(cls[i]);
    EXPECT_EQ(rel.kernel, kernel);
    EXPECT_EQ(decision, cls[want.decision]);
  }
}

TEST(ElectreParams, ParseAndValidate) {
  const auto p = ElectreParams::parse({"# c", "sc 0.6", "weight svm 2", "veto boost 0.3", "default_veto 0.4"},
                                      ElectreParams::defaults_for_difficulty());
  EXPECT_EQ(p.concordance_threshold, 0.6);
  EXPECT_EQ(p.weight("svm"), 2.0);
  EXPECT_EQ(p.weight("hier"), 1.0);
  EXPECT_EQ(p.veto("boost"), 0.3);
  EXPECT_EQ(p.veto("svm"), 0.4);
  EXPECT_THROW(ElectreParams::parse({"sc"}, {}), Error);
  EXPECT_THROW(ElectreParams::parse({"sc 1.2"}, {}), Error);
  EXPECT_THROW(ElectreParams::parse({"weight svm 0"}, {}), Error);
  EXPECT_THROW(ElectreParams::parse({"thing 1"}, {}), Error);
}
