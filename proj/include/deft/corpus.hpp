#pragma once

// Recipe collections: XML ingest/export and deterministic stratified splits.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "deft/common.hpp"

namespace deft {

enum class Difficulty { TresFacile, Facile, MoyennementDifficile, Difficile };
enum class DishType { Entree, PlatPrincipal, Dessert };
enum class LabelKind { Difficulty, DishType, None };

inline constexpr const char* kDifficultyLabels[] = {"Très facile", "Facile",
                                                    "Moyennement difficile", "Difficile"};
inline constexpr const char* kDishTypeLabels[] = {"Entrée", "Plat principal", "Dessert"};

inline std::string to_label(Difficulty d) { return kDifficultyLabels[static_cast<int>(d)]; }
inline std::string to_label(DishType d) { return kDishTypeLabels[static_cast<int>(d)]; }

// Ordinal rank on the 4-level scale: 0 = very easy .. 3 = difficult.
inline int rank(Difficulty d) { return static_cast<int>(d); }

inline std::optional<Difficulty> parse_difficulty(std::string_view s) {
  for (int i = 0; i < 4; ++i)
    if (s == kDifficultyLabels[i]) return static_cast<Difficulty>(i);
  return std::nullopt;
}

inline std::optional<DishType> parse_dish_type(std::string_view s) {
  for (int i = 0; i < 3; ++i)
    if (s == kDishTypeLabels[i]) return static_cast<DishType>(i);
  return std::nullopt;
}

// Rank of a difficulty label string, or nullopt for other strings.
inline std::optional<int> difficulty_rank(std::string_view label) {
  auto d = parse_difficulty(label);
  if (!d) return std::nullopt;
  return rank(*d);
}

struct Recipe {
  std::string id;
  std::string title;
  std::string body;
  std::optional<Difficulty> difficulty;
  std::optional<DishType> dish_type;
  std::optional<std::vector<std::string>> gold_ingredients;

  std::optional<std::string> label(LabelKind kind) const {
    if (kind == LabelKind::Difficulty && difficulty) return to_label(*difficulty);
    if (kind == LabelKind::DishType && dish_type) return to_label(*dish_type);
    return std::nullopt;
  }

  bool operator==(const Recipe&) const = default;
};

struct Corpus {
  std::vector<Recipe> recipes;
  LabelKind label_kind = LabelKind::None;

  std::size_t size() const { return recipes.size(); }

  // Gold labels in document order. Only valid for labeled corpora.
  std::vector<std::string> labels() const {
    std::vector<std::string> out;
    out.reserve(recipes.size());
    for (const auto& r : recipes) {
      auto l = r.label(label_kind);
      if (!l) throw Error(ErrorCode::Data, "corpus", "recipe has no gold label", r.id);
      out.push_back(*l);
    }
    return out;
  }

  // Distinct gold labels, sorted bytewise. This is the class order used by
  // every classifier and every argmax tie-break.
  std::vector<std::string> classes() const {
    auto l = labels();
    std::set<std::string> uniq(l.begin(), l.end());
    return {uniq.begin(), uniq.end()};
  }

  bool operator==(const Corpus&) const = default;
};

inline void validate_corpus(const Corpus& corpus) {
  if (corpus.recipes.empty()) throw Error(ErrorCode::Data, "corpus", "empty corpus");
  std::set<std::string> ids;
  for (const auto& r : corpus.recipes) {
    if (r.id.empty()) throw Error(ErrorCode::Data, "corpus", "recipe with empty id");
    if (!ids.insert(r.id).second)
      throw Error(ErrorCode::Data, "corpus", "duplicate recipe id", r.id);
    if (trim(r.title).empty())
      throw Error(ErrorCode::Data, "corpus", "empty <titre>", r.id);
    if (trim(r.body).empty())
      throw Error(ErrorCode::Data, "corpus", "empty <preparation>", r.id);
    if (corpus.label_kind != LabelKind::None && !r.label(corpus.label_kind))
      throw Error(ErrorCode::Data, "corpus", "labeled corpus with unlabeled recipe", r.id);
  }
}

inline Corpus parse_corpus(const std::string& xml, LabelKind kind) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream in(xml);
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw Error(ErrorCode::Data, "corpus", std::string("malformed XML: ") + e.what());
  }
  auto root = tree.get_child_optional("recettes");
  if (!root) throw Error(ErrorCode::Data, "corpus", "missing <recettes> root");

  Corpus corpus;
  corpus.label_kind = kind;
  for (const auto& [tag, node] : *root) {
    if (tag != "recette") continue;
    Recipe r;
    r.id = trim(node.get<std::string>("<xmlattr>.id", ""));
    auto title = node.get_optional<std::string>("titre");
    auto body = node.get_optional<std::string>("preparation");
    if (!title) throw Error(ErrorCode::Data, "corpus", "missing <titre>", r.id);
    if (!body) throw Error(ErrorCode::Data, "corpus", "missing <preparation>", r.id);
    r.title = trim(*title);
    r.body = trim(*body);
    if (auto niveau = node.get_optional<std::string>("niveau")) {
      r.difficulty = parse_difficulty(trim(*niveau));
      if (!r.difficulty)
        throw Error(ErrorCode::Data, "corpus", "unknown <niveau> '" + trim(*niveau) + "'", r.id);
    }
    if (auto type = node.get_optional<std::string>("type")) {
      r.dish_type = parse_dish_type(trim(*type));
      if (!r.dish_type)
        throw Error(ErrorCode::Data, "corpus", "unknown <type> '" + trim(*type) + "'", r.id);
    }
    if (auto ingr = node.get_child_optional("ingredients")) {
      std::vector<std::string> items;
      for (const auto& [itag, inode] : *ingr)
        if (itag == "ingredient") {
          std::string v = trim(inode.data());
          if (!v.empty()) items.push_back(v);
        }
      r.gold_ingredients = std::move(items);
    }
    corpus.recipes.push_back(std::move(r));
  }
  validate_corpus(corpus);
  return corpus;
}

inline Corpus load_corpus(const std::string& path, LabelKind kind) {
  return parse_corpus(read_file(path, "corpus"), kind);
}

inline std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string to_xml(const Corpus& corpus) {
  std::string out = "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<recettes>\n";
  for (const auto& r : corpus.recipes) {
    out += "  <recette id=\"" + xml_escape(r.id) + "\">\n";
    out += "    <titre>" + xml_escape(r.title) + "</titre>\n";
    if (r.difficulty) out += "    <niveau>" + xml_escape(to_label(*r.difficulty)) + "</niveau>\n";
    if (r.dish_type) out += "    <type>" + xml_escape(to_label(*r.dish_type)) + "</type>\n";
    if (r.gold_ingredients) {
      out += "    <ingredients>\n";
      for (const auto& i : *r.gold_ingredients)
        out += "      <ingredient>" + xml_escape(i) + "</ingredient>\n";
      out += "    </ingredients>\n";
    }
    out += "    <preparation>" + xml_escape(r.body) + "</preparation>\n";
    out += "  </recette>\n";
  }
  out += "</recettes>\n";
  return out;
}

// ---------------------------------------------------------------------------

// Exact rational in (0,1).
struct Fraction {
  std::uint64_t num = 1;
  std::uint64_t den = 4;

  // Accepts "a/b" or a plain decimal such as "0.25".
  static Fraction parse(std::string_view text) {
    const auto slash = text.find('/');
    Fraction f;
    if (slash != std::string_view::npos) {
      f.num = static_cast<std::uint64_t>(parse_int(text.substr(0, slash), "corpus"));
      f.den = static_cast<std::uint64_t>(parse_int(text.substr(slash + 1), "corpus"));
    } else {
      const auto dot = text.find('.');
      std::string digits(text.substr(0, dot));
      std::uint64_t den = 1;
      if (dot != std::string_view::npos) {
        std::string frac(text.substr(dot + 1));
        if (frac.size() > 15) frac.resize(15);
        digits += frac;
        for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
      }
      if (digits.empty()) throw Error(ErrorCode::Config, "corpus", "bad fraction");
      f.num = static_cast<std::uint64_t>(parse_int(digits, "corpus"));
      f.den = den;
    }
    return f;
  }

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }

  // round(num * n / den), halves rounded up.
  std::uint64_t round_times(std::uint64_t n) const {
    using wide = unsigned __int128;
    return static_cast<std::uint64_t>((2 * wide{num} * n + den) / (2 * wide{den}));
  }
};

struct SplitSpec {
  Fraction dev_fraction;
  std::uint64_t seed = 1;
};

// Per-class dev membership flags. Classes are visited in sorted order and
// each class's members (document order) are shuffled with one shared
// SplitMix64 stream seeded by `seed`; the first round(f*|c|) go to dev.
inline std::vector<bool> stratified_dev_mask(const std::vector<std::string>& labels,
                                             const SplitSpec& spec) {
  const Fraction& f = spec.dev_fraction;
  if (f.den == 0 || f.num == 0 || f.num >= f.den)
    throw Error(ErrorCode::Config, "corpus", "dev_fraction must lie strictly between 0 and 1");
  std::map<std::string, std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(i);

  std::vector<bool> dev(labels.size(), false);
  SplitMix64 rng(spec.seed);
  for (auto& [label, idx] : members) {
    const std::uint64_t n = idx.size();
    if (n < 2)
      throw Error(ErrorCode::Data, "corpus", "class '" + label + "' has fewer than 2 members");
    std::uint64_t take = f.round_times(n);
    take = std::clamp<std::uint64_t>(take, 1, n - 1);
    deterministic_shuffle(idx, rng);
    for (std::uint64_t k = 0; k < take; ++k) dev[idx[k]] = true;
  }
  return dev;
}

inline std::pair<Corpus, Corpus> stratified_split(const Corpus& corpus, const SplitSpec& spec) {
  if (corpus.label_kind == LabelKind::None)
    throw Error(ErrorCode::Data, "corpus", "stratified split needs a labeled corpus");
  const auto dev_mask = stratified_dev_mask(corpus.labels(), spec);
  Corpus train{{}, corpus.label_kind};
  Corpus dev{{}, corpus.label_kind};
  for (std::size_t i = 0; i < corpus.recipes.size(); ++i)
    (dev_mask[i] ? dev : train).recipes.push_back(corpus.recipes[i]);
  return {std::move(train), std::move(dev)};
}

}  // namespace deft
