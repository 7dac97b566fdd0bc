#pragma once

// Lexicon-based ingredient extraction. Text tokens are intersected with the
// set of gold ingredient forms seen in training; generic mentions (viande,
// fromage, poisson) are resolved to the most probable specific ingredient
// given the other candidates.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "deft/common.hpp"
#include "deft/corpus.hpp"
#include "deft/textnorm.hpp"

namespace deft {

struct Candidate {
  std::string ingredient;
  double confidence = 0.0;

  bool operator==(const Candidate&) const = default;
};

// Sorted by confidence descending, then ingredient.
using CandidateList = std::vector<Candidate>;

inline void sort_candidates(CandidateList& list) {
  std::sort(list.begin(), list.end(), [](const Candidate& a, const Candidate& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.ingredient < b.ingredient;
  });
}

// Steps 1-3 of normalization, tokens joined by single spaces.
inline std::string ingredient_form(std::string_view text, const NormConfig& norm) {
  return join(normalize_base(text, norm), " ");
}

inline bool has_plural_suffix(const std::string& s) {
  return s.size() > 1 && (s.back() == 's' || s.back() == 'x');
}

struct IngredientLexicon {
  std::map<std::string, std::string> entries;  // surface form -> canonical output form
  std::set<std::string> generic_terms{"fromage", "poisson", "viande"};
  // generic -> specific -> training recipes whose gold list has the specific
  // and whose text mentions the generic
  std::map<std::string, std::map<std::string, int>> specializations;
  // unordered canonical pair (first < second) -> training recipes listing both
  std::map<std::pair<std::string, std::string>, int> cooccurrence;

  int max_words() const {
    int m = 1;
    for (const auto& [form, canon] : entries)
      m = std::max<int>(m, static_cast<int>(std::count(form.begin(), form.end(), ' ')) + 1);
    return m;
  }

  int cooc(const std::string& a, const std::string& b) const {
    auto it = cooccurrence.find(a < b ? std::make_pair(a, b) : std::make_pair(b, a));
    return it == cooccurrence.end() ? 0 : it->second;
  }

  // Generic token matched by `tok` (plural folded), or empty.
  std::string generic_of(const std::string& tok) const {
    if (generic_terms.count(tok)) return tok;
    if (has_plural_suffix(tok) && generic_terms.count(tok.substr(0, tok.size() - 1)))
      return tok.substr(0, tok.size() - 1);
    return {};
  }

  // Everything the extractor may emit.
  std::set<std::string> emittable() const {
    std::set<std::string> out;
    for (const auto& [form, canon] : entries) out.insert(canon);
    for (const auto& [g, specs] : specializations)
      for (const auto& [x, n] : specs) out.insert(x);
    return out;
  }

  std::string serialize() const {
    std::vector<std::string> lines;
    for (const auto& [form, canon] : entries) lines.push_back("entry\t" + form + "\t" + canon);
    for (const auto& g : generic_terms) lines.push_back("generic\t" + g);
    for (const auto& [pair, n] : cooccurrence)
      lines.push_back("cooc\t" + pair.first + "\t" + pair.second + "\t" + std::to_string(n));
    for (const auto& [g, specs] : specializations)
      for (const auto& [x, n] : specs) lines.push_back("spec\t" + g + "\t" + x + "\t" + std::to_string(n));
    std::sort(lines.begin(), lines.end());
    std::string out = "deft-lexicon\t1\n";
    for (const auto& l : lines) out += l + "\n";
    return out;
  }

  static IngredientLexicon parse(const std::vector<std::string>& lines) {
    auto bad = [](const std::string& why) {
      return Error(ErrorCode::ModelMismatch, "extraction", "bad lexicon: " + why);
    };
    if (lines.empty() || lines[0] != "deft-lexicon\t1") throw bad("missing version header");
    IngredientLexicon lex;
    lex.generic_terms.clear();
    for (std::size_t i = 1; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      auto c = split(lines[i], '\t');
      if (c[0] == "entry" && c.size() == 3) lex.entries[c[1]] = c[2];
      else if (c[0] == "generic" && c.size() == 2) lex.generic_terms.insert(c[1]);
      else if (c[0] == "cooc" && c.size() == 4) lex.cooccurrence[{c[1], c[2]}] = static_cast<int>(parse_int(c[3], "extraction"));
      else if (c[0] == "spec" && c.size() == 4) lex.specializations[c[1]][c[2]] = static_cast<int>(parse_int(c[3], "extraction"));
      else throw bad("line " + std::to_string(i + 1));
    }
    return lex;
  }

  bool operator==(const IngredientLexicon&) const = default;
};

inline IngredientLexicon build_lexicon(const Corpus& train, const NormConfig& norm) {
  IngredientLexicon lex;
  std::set<std::string> gold;
  std::vector<std::pair<const Recipe*, std::set<std::string>>> forms;
  for (const auto& r : train.recipes) {
    if (!r.gold_ingredients) continue;
    std::set<std::string> f;
    for (const auto& item : *r.gold_ingredients) {
      std::string form = ingredient_form(item, norm);
      if (form.empty() || !lex.generic_of(form).empty()) continue;
      f.insert(form);
      gold.insert(form);
    }
    forms.emplace_back(&r, std::move(f));
  }
  if (forms.empty())
    throw Error(ErrorCode::Data, "extraction", "no training recipe carries gold ingredients");

  auto canonical = [&](const std::string& f) {
    if (has_plural_suffix(f) && gold.count(f.substr(0, f.size() - 1))) return f.substr(0, f.size() - 1);
    return f;
  };
  for (const auto& f : gold) lex.entries[f] = canonical(f);
  for (const auto& f : gold) {
    lex.entries.emplace(f + "s", canonical(f));
    if (has_plural_suffix(f)) lex.entries.emplace(f.substr(0, f.size() - 1), canonical(f));
  }

  for (const auto& [r, f] : forms) {
    std::set<std::string> canon;
    for (const auto& x : f) canon.insert(canonical(x));
    for (auto a = canon.begin(); a != canon.end(); ++a)
      for (auto b = std::next(a); b != canon.end(); ++b) ++lex.cooccurrence[{*a, *b}];
    std::set<std::string> generics_in_text;
    for (const auto* text : {&r->title, &r->body})
      for (const auto& tok : normalize_base(*text, norm))
        if (auto g = lex.generic_of(tok); !g.empty()) generics_in_text.insert(g);
    for (const auto& g : generics_in_text)
      for (const auto& x : canon) ++lex.specializations[g][x];
  }
  return lex;
}

struct Extraction {
  CandidateList candidates;
  std::set<std::string> generics;  // generic terms seen in the text
};

// Longest-match-first scan (windows of 1 to 3 tokens) of the title and body
// separately. Confidence of a hit is min(1, tf/2 + 0.5).
inline Extraction extract_candidates(const Recipe& recipe, const IngredientLexicon& lex,
                                     const NormConfig& norm) {
  Extraction out;
  std::map<std::string, int> tf;
  const int max_words = std::min(3, lex.max_words());
  for (const auto* text : {&recipe.title, &recipe.body}) {
    const TokenStream toks = normalize_base(*text, norm);
    std::size_t i = 0;
    while (i < toks.size()) {
      bool hit = false;
      for (int n = std::min<int>(max_words, static_cast<int>(toks.size() - i)); n >= 1 && !hit; --n) {
        if (n == 1) {
          if (auto g = lex.generic_of(toks[i]); !g.empty()) {
            out.generics.insert(g);
            i += 1;
            hit = true;
            break;
          }
        }
        std::string window = toks[i];
        for (int k = 1; k < n; ++k) window += " " + toks[i + k];
        if (auto it = lex.entries.find(window); it != lex.entries.end()) {
          ++tf[it->second];
          i += n;
          hit = true;
        }
      }
      if (!hit) ++i;
    }
  }
  for (const auto& [name, n] : tf) out.candidates.push_back({name, std::min(1.0, n / 2.0 + 0.5)});
  sort_candidates(out.candidates);
  return out;
}

struct GenericPosterior {
  std::map<std::string, double> posterior;  // specific -> smoothed p(x | candidates)
  std::map<std::string, int> counts;        // unsmoothed evidence
};

// p(x | L) = (count(x, L) + 1) / (sum_x' count(x', L) + |specifics|) where
// count(x, L) sums training co-occurrences of x with every other candidate.
inline GenericPosterior generic_posteriors(const CandidateList& candidates, const std::string& generic,
                                           const IngredientLexicon& lex) {
  GenericPosterior gp;
  auto it = lex.specializations.find(generic);
  if (it == lex.specializations.end() || it->second.empty()) return gp;
  double total = 0.0;
  for (const auto& [x, n] : it->second) {
    int c = 0;
    for (const auto& cand : candidates)
      if (cand.ingredient != x) c += lex.cooc(x, cand.ingredient);
    gp.counts[x] = c;
    total += c;
  }
  const double denom = total + static_cast<double>(it->second.size());
  for (const auto& [x, c] : gp.counts) gp.posterior[x] = (c + 1.0) / denom;
  return gp;
}

// Injects, per generic, the most probable specific (first in name order on
// ties) when it has any unsmoothed evidence. Existing candidates are kept.
inline CandidateList resolve_generics(const CandidateList& candidates, const std::set<std::string>& generics,
                                      const IngredientLexicon& lex) {
  CandidateList out = candidates;
  for (const auto& g : generics) {
    const auto gp = generic_posteriors(candidates, g, lex);
    std::string best;
    double best_p = -1.0;
    for (const auto& [x, p] : gp.posterior)
      if (p > best_p) {
        best = x;
        best_p = p;
      }
    if (best.empty() || gp.counts.at(best) == 0) continue;
    const bool present = std::any_of(out.begin(), out.end(), [&](const Candidate& c) { return c.ingredient == best; });
    if (!present) out.push_back({best, best_p});
  }
  sort_candidates(out);
  return out;
}

inline CandidateList extract_ingredients(const Recipe& recipe, const IngredientLexicon& lex,
                                         const NormConfig& norm) {
  auto ex = extract_candidates(recipe, lex, norm);
  return resolve_generics(ex.candidates, ex.generics, lex);
}

inline std::vector<std::string> ingredient_names(const CandidateList& list) {
  std::vector<std::string> out;
  for (const auto& c : list) out.push_back(c.ingredient);
  return out;
}

// `recipe_id<TAB>rank<TAB>ingredient<TAB>confidence`, ranks from 1.
inline std::string format_extraction_run(const std::vector<std::pair<std::string, CandidateList>>& runs) {
  std::string out;
  for (const auto& [id, list] : runs)
    for (std::size_t k = 0; k < list.size(); ++k)
      out += id + "\t" + std::to_string(k + 1) + "\t" + list[k].ingredient + "\t" +
             format_fixed(list[k].confidence) + "\n";
  return out;
}

}  // namespace deft
