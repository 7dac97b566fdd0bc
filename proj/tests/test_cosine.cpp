#include <gtest/gtest.h>

#include "deft/cosine.hpp"
#include "oracles/text_oracle.hpp"
#include "support.hpp"

using namespace deft;

namespace {

struct Six {
  Corpus corpus = testing_support::six();
  Normalizer norm;
  std::shared_ptr<LexiconStats> stats = std::make_shared<LexiconStats>(build_stats(corpus, corpus, norm));
  std::vector<TermCounts> docs = corpus_terms(corpus, norm);
  oracle::Collection coll;

  Six() {
    for (const auto& r : corpus.recipes) {
      auto d = norm(r.title);
      for (auto& t : norm(r.body)) d.push_back(t);
      coll.docs.push_back(d);
    }
    coll.labels = corpus.labels();
  }
};

}  // namespace

TEST(Cosine, MatchesOracleBothDenominators) {
  Six f;
  for (double th : {0.0, 0.45, 0.5, 1.0})
    for (auto mode : {DenominatorMode::Standard, DenominatorMode::Literal}) {
      const auto model = train_cosine(f.stats, th, mode);
      for (std::size_t i = 0; i < f.docs.size(); ++i) {
        const auto got = cosine_scores(model, f.docs[i]);
        const auto want = f.coll.cosine(f.coll.docs[i], th, mode == DenominatorMode::Literal);
        ASSERT_EQ(got.size(), want.size());
        for (std::size_t c = 0; c < got.size(); ++c) EXPECT_NEAR(got[c], want[c], 1e-12) << th << " " << i;
        if (mode == DenominatorMode::Standard)
          for (double s : got) {
            EXPECT_GE(s, 0.0);
            EXPECT_LE(s, 1.0 + 1e-15);
          }
      }
    }
}

TEST(Cosine, SupportShrinksAsThresholdRises) {
  Six f;
  std::size_t prev = SIZE_MAX;
  for (int step = 0; step <= 20; ++step) {
    const auto model = train_cosine(f.stats, step / 20.0);
    std::set<std::string> support;
    for (const auto& v : model.class_vectors)
      for (const auto& [t, w] : v.entries()) support.insert(t);
    EXPECT_LE(support.size(), prev);
    prev = support.size();
  }
}

TEST(Cosine, RecipeOneLeansToStarter) {
  Six f;
  const auto model = train_cosine(f.stats, 0.45);
  EXPECT_EQ(score_cosine(model, f.docs[0]).argmax(), "Entrée");
}

TEST(Cosine, DfBoostRaisesClassWeight) {
  Six f;
  const auto plain = train_cosine(f.stats, 0.45);
  const auto boosted = train_cosine(f.stats, 0.45, DenominatorMode::Standard, parse_df_boost({"lardons\tEntrée\t3"}));
  const int c = f.stats->class_index("Entrée");
  EXPECT_NEAR(boosted.class_vectors[c].get("lardons"), plain.class_vectors[c].get("lardons") * 5.0 / 2.0, 1e-12);
  EXPECT_THROW(parse_df_boost({"lardons\tEntrée"}), Error);
}

TEST(Cosine, SerializationRoundTrip) {
  Six f;
  const auto model = train_cosine(f.stats, 0.45, DenominatorMode::Literal, parse_df_boost({"four\tDessert\t1"}));
  const auto back = CosineModel::parse(split(model.serialize(), '\n'));
  EXPECT_EQ(back.serialize(), model.serialize());
  for (const auto& d : f.docs) EXPECT_EQ(cosine_scores(back, d), cosine_scores(model, d));
  EXPECT_THROW(train_cosine(f.stats, 1.5), Error);
}

TEST(Hierarchy, LeafScoresFormDistribution) {
  Six f;
  std::vector<FeedTerms> feeds;
  for (const auto& r : f.corpus.recipes) feeds.push_back(feed_terms(r, f.norm));
  const auto spec = HierarchySpec::dish_type();
  const auto model = train_hierarchical(feeds, f.corpus.labels(), feeds, spec, 0.45);
  for (std::size_t i = 0; i < feeds.size(); ++i) {
    const auto s = classify_hierarchical(model, feeds[i]);
    double sum = 0;
    for (const auto& [c, p] : s.scores) {
      EXPECT_GE(p, 0.0);
      sum += p;
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  // Dessert recipes are separated at the first stage.
  EXPECT_EQ(classify_hierarchical(model, feeds[4]).argmax(), "Dessert");

  const auto back = HierarchicalModel::parse(split(model.serialize(), '\n'));
  EXPECT_EQ(back.serialize(), model.serialize());
  for (const auto& x : feeds) EXPECT_EQ(classify_hierarchical(back, x).scores, classify_hierarchical(model, x).scores);
}

TEST(Hierarchy, ShippedSpecsParse) {
  const auto t1 = HierarchySpec::parse(read_lines(std::string(DEFT_DATA) + "/hierarchy_T1.txt", "test"));
  EXPECT_EQ(t1, HierarchySpec::difficulty());
  const auto t2 = HierarchySpec::parse(read_lines(std::string(DEFT_DATA) + "/hierarchy_T2.txt", "test"));
  EXPECT_EQ(t2, HierarchySpec::dish_type());
}

TEST(Hierarchy, InconsistentSpecs) {
  const std::vector<std::string> classes{"Dessert", "Entrée", "Plat principal"};
  // Final stage merges two leaves.
  auto merged = HierarchySpec::parse({"stage", "Dessert\tD", "Entrée\tX", "Plat principal\tX"});
  EXPECT_THROW(merged.validate(classes), Error);
  // Leaf missing from a stage.
  auto missing = HierarchySpec::parse({"stage", "Dessert\tD", "Entrée\tE"});
  EXPECT_THROW(missing.validate(classes), Error);
  // Second stage does not refine the first.
  auto crossing = HierarchySpec::parse({"stage", "Dessert\tA", "Entrée\tA", "Plat principal\tB", "stage",
                                        "Dessert\tD", "Entrée\tP", "Plat principal\tP"});
  EXPECT_THROW(crossing.validate(classes), Error);
  EXPECT_THROW(HierarchySpec::parse({"Dessert\tD"}), Error);
  EXPECT_THROW(HierarchySpec::parse({"stage 1.5", "Dessert\tD"}).validate({"Dessert"}), Error);
}
