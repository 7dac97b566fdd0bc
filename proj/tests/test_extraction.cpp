#include <gtest/gtest.h>

#include "deft/extraction.hpp"
#include "support.hpp"

using namespace deft;

namespace {

Recipe text(const std::string& body, const std::string& title = "Plat") { return {"x", title, body, {}, {}, {}}; }

struct Lex {
  NormConfig norm;
  IngredientLexicon lex = build_lexicon(testing_support::six(), norm);
};

}  // namespace

TEST(Extraction, GenericResolvesToJambon) {
  Lex f;
  EXPECT_EQ(f.lex.specializations.at("viande"), (std::map<std::string, int>{{"jambon", 1}, {"lardons", 1}}));
  const auto ex = extract_candidates(text("Faire dorer les lardons et le reblochon avec la viande."), f.lex, f.norm);
  EXPECT_EQ(ingredient_names(ex.candidates), (std::vector<std::string>{"lardons", "reblochon"}));
  EXPECT_EQ(ex.generics, (std::set<std::string>{"viande"}));
  const auto gp = generic_posteriors(ex.candidates, "viande", f.lex);
  EXPECT_EQ(gp.counts.at("jambon"), 1);
  EXPECT_EQ(gp.counts.at("lardons"), 0);
  EXPECT_DOUBLE_EQ(gp.posterior.at("jambon"), 2.0 / 3.0);
  const auto out = resolve_generics(ex.candidates, ex.generics, f.lex);
  EXPECT_EQ(ingredient_names(out), (std::vector<std::string>{"lardons", "reblochon", "jambon"}));
}

TEST(Extraction, MultiWordSingleCandidate) {
  Lex f;
  const auto out = extract_ingredients(text("Fouetter la crème fraîche bien froide."), f.lex, f.norm);
  ASSERT_EQ(out.size(), 1u);
  EXPECT_EQ(out[0].ingredient, "crème fraîche");
  EXPECT_EQ(out[0].confidence, 1.0);
}

TEST(Extraction, NoIngredientMentioned) {
  Lex f;
  EXPECT_TRUE(extract_ingredients(text("Mélanger énergiquement tous les ingrédients."), f.lex, f.norm).empty());
}

TEST(Extraction, PluralFolding) {
  Lex f;
  EXPECT_EQ(ingredient_names(extract_ingredients(text("Casser un oeuf."), f.lex, f.norm)),
            (std::vector<std::string>{"oeufs"}));
  EXPECT_EQ(ingredient_names(extract_ingredients(text("Ajouter une fraise, deux fraises."), f.lex, f.norm)),
            (std::vector<std::string>{"fraises"}));
}

TEST(Extraction, ClosedWorldAndPosteriors) {
  Lex f;
  const auto allowed = f.lex.emittable();
  const std::vector<std::string> pool{"viande", "fromage", "poisson", "lardons", "oeufs", "crème", "fraîche", "sucre",
                                      "reblochon", "tomates", "cabillaud", "le", "et", "cuire", "pommes", "de", "terre"};
  SplitMix64 rng(8);
  for (int n = 0; n < 200; ++n) {
    std::string body;
    for (int w = 0; w < 12; ++w) body += pool[rng.below(pool.size())] + " ";
    const auto ex = extract_candidates(text(body), f.lex, f.norm);
    for (const auto& c : resolve_generics(ex.candidates, ex.generics, f.lex)) {
      EXPECT_TRUE(allowed.count(c.ingredient)) << c.ingredient;
      EXPECT_GT(c.confidence, 0.0);
      EXPECT_LE(c.confidence, 1.0);
    }
    for (const auto& g : ex.generics) {
      const auto gp = generic_posteriors(ex.candidates, g, f.lex);
      if (gp.posterior.empty()) continue;
      double sum = 0;
      for (const auto& [x, p] : gp.posterior) sum += p;
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Extraction, ConfidenceGrowsWithMentions) {
  Lex f;
  IngredientLexicon lex;
  lex.entries = {{"sel", "sel"}};
  EXPECT_EQ(extract_candidates(text("sel"), lex, f.norm).candidates[0].confidence, 1.0);
  EXPECT_EQ(extract_candidates(text("sel sel sel"), lex, f.norm).candidates[0].confidence, 1.0);
}

TEST(Extraction, LexiconRoundTripAndRunFormat) {
  Lex f;
  EXPECT_EQ(IngredientLexicon::parse(split(f.lex.serialize(), '\n')), f.lex);
  EXPECT_THROW(IngredientLexicon::parse({"deft-lexicon\t1", "entry\tonly"}), Error);
  const std::vector<std::pair<std::string, CandidateList>> run{{"r9", {{"sucre", 1.0}, {"jambon", 2.0 / 3.0}}}};
  EXPECT_EQ(format_extraction_run(run), "r9\t1\tsucre\t1.000000\nr9\t2\tjambon\t0.666667\n");
}

TEST(Extraction, NeedsGoldLists) {
  Corpus c;
  c.recipes.push_back(text("sel"));
  EXPECT_THROW(build_lexicon(c, NormConfig{}), Error);
}
