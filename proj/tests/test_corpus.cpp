#include <gtest/gtest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <set>

#include "deft/corpus.hpp"
#include "support.hpp"

using namespace deft;
using testing_support::six;

namespace {

std::string one_recipe(const std::string& inner) {
  return "<recettes><recette id=\"1\"><titre>Quiche</titre><preparation>Battre les oeufs.</preparation>" + inner +
         "</recette></recettes>";
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::Config;
}

}  // namespace

TEST(Corpus, SingleRecipe) {
  const Corpus c = parse_corpus(one_recipe("<niveau>Facile</niveau>"), LabelKind::Difficulty);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_EQ(c.recipes[0].title, "Quiche");
  EXPECT_EQ(c.recipes[0].body, "Battre les oeufs.");
  EXPECT_EQ(c.recipes[0].difficulty, Difficulty::Facile);
  EXPECT_EQ(rank(Difficulty::Facile), 1);
}

TEST(Corpus, FixtureClassCounts) {
  const Corpus c = six();
  ASSERT_EQ(c.size(), 6u);
  std::map<std::string, int> counts;
  for (const auto& l : c.labels()) ++counts[l];
  EXPECT_EQ(counts, (std::map<std::string, int>{{"Dessert", 2}, {"Entrée", 2}, {"Plat principal", 2}}));
  EXPECT_EQ(c.classes(), (std::vector<std::string>{"Dessert", "Entrée", "Plat principal"}));
}

TEST(Corpus, SchemaErrors) {
  const std::string dup =
      "<recettes><recette id=\"7\"><titre>a</titre><preparation>b</preparation></recette>"
      "<recette id=\"7\"><titre>c</titre><preparation>d</preparation></recette></recettes>";
  EXPECT_EQ(code_of([&] { parse_corpus(dup, LabelKind::None); }), ErrorCode::Data);
  EXPECT_EQ(code_of([] { parse_corpus(one_recipe("<niveau>Impossible</niveau>"), LabelKind::None); }),
            ErrorCode::Data);
  EXPECT_EQ(code_of([] { parse_corpus("<recettes><recette id=\"1\"><titre>x</titre></recette></recettes>",
                                      LabelKind::None); }),
            ErrorCode::Data);
  EXPECT_EQ(code_of([] { parse_corpus("<recettes><recette", LabelKind::None); }), ErrorCode::Data);
  EXPECT_EQ(code_of([] { parse_corpus("<recettes></recettes>", LabelKind::None); }), ErrorCode::Data);
  EXPECT_EQ(code_of([] {
              parse_corpus("<recettes><recette id=\"1\"><titre>x</titre><preparation>  </preparation></recette></recettes>",
                           LabelKind::None);
            }),
            ErrorCode::Data);
  // Labeled corpora need the label on every recipe.
  EXPECT_EQ(code_of([] { parse_corpus(one_recipe(""), LabelKind::DishType); }), ErrorCode::Data);
}

TEST(Corpus, XmlRoundTrip) {
  const Corpus c = six();
  EXPECT_EQ(parse_corpus(to_xml(c), LabelKind::DishType), c);
  Corpus odd;
  odd.recipes.push_back({"a&b", "Tarte <fine>", "Cuire \"vite\" & bien.", Difficulty::Difficile, std::nullopt,
                         std::vector<std::string>{"sel & poivre"}});
  EXPECT_EQ(parse_corpus(to_xml(odd), LabelKind::None), odd);
}

TEST(Split, RoundingExample) {
  std::vector<std::string> labels(60, "a");
  labels.insert(labels.end(), 40, "b");
  const auto mask = stratified_dev_mask(labels, {Fraction::parse("0.25"), 1});
  int a = 0, b = 0;
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (mask[i]) (labels[i] == "a" ? a : b)++;
  EXPECT_EQ(a, 15);
  EXPECT_EQ(b, 10);
}

TEST(Split, DeterministicAndPartition) {
  const Corpus c = parse_corpus(read_file(testing_support::fixture("synthetic_train.xml"), "test"), LabelKind::DishType);
  const SplitSpec spec{Fraction{1, 4}, 99};
  const auto [train1, dev1] = stratified_split(c, spec);
  const auto [train2, dev2] = stratified_split(c, spec);
  EXPECT_EQ(train1, train2);
  EXPECT_EQ(dev1, dev2);
  EXPECT_EQ(train1.size() + dev1.size(), c.size());
  std::set<std::string> ids;
  for (const auto* part : {&train1, &dev1})
    for (const auto& r : part->recipes) EXPECT_TRUE(ids.insert(r.id).second);

  // Another seed: same per-class sizes, different members.
  const auto [train3, dev3] = stratified_split(c, {Fraction{1, 4}, 100});
  std::map<std::string, int> n1, n3;
  for (const auto& l : dev1.labels()) ++n1[l];
  for (const auto& l : dev3.labels()) ++n3[l];
  EXPECT_EQ(n1, n3);
  EXPECT_NE(dev1, dev3);
}

TEST(Split, PaperScaleDevSize) {
  // 13 684 recipes over the four difficulty levels.
  const std::map<std::string, int> sizes{{"a", 5210}, {"b", 4833}, {"c", 2741}, {"d", 900}};
  std::vector<std::string> labels;
  for (const auto& [l, n] : sizes) labels.insert(labels.end(), n, l);
  ASSERT_EQ(labels.size(), 13684u);
  const auto mask = stratified_dev_mask(labels, {Fraction::parse("3863/13684"), 1});
  const long dev = std::count(mask.begin(), mask.end(), true);
  EXPECT_LE(std::abs(dev - 3863), 4);
}

TEST(Split, Errors) {
  EXPECT_EQ(code_of([] { stratified_dev_mask({"a", "a", "b"}, {Fraction{1, 2}, 1}); }), ErrorCode::Data);
  EXPECT_EQ(code_of([] { stratified_dev_mask({"a", "a"}, {Fraction{0, 2}, 1}); }), ErrorCode::Config);
  EXPECT_EQ(code_of([] { stratified_dev_mask({"a", "a"}, {Fraction{2, 2}, 1}); }), ErrorCode::Config);
  // Clamping keeps one member on each side.
  const auto mask = stratified_dev_mask({"a", "a"}, {Fraction{1, 100}, 1});
  EXPECT_EQ(std::count(mask.begin(), mask.end(), true), 1);
}

TEST(Split, FractionParsing) {
  const Fraction f = Fraction::parse("3863/13684");
  EXPECT_EQ(f.num, 3863u);
  EXPECT_EQ(f.den, 13684u);
  const Fraction g = Fraction::parse("0.25");
  EXPECT_EQ(g.round_times(60), 15u);
  EXPECT_EQ(Fraction::parse("1/2").round_times(5), 3u);  // halves round up
}

TEST(Rng, SplitMixReferenceValues) {
  // First outputs for seed 1234567, from the published reference algorithm.
  SplitMix64 rng(1234567);
  EXPECT_EQ(rng.next(), 6457827717110365317ull);
  EXPECT_EQ(rng.next(), 3203168211198807973ull);
  EXPECT_EQ(rng.next(), 9817491932198370423ull);
}
