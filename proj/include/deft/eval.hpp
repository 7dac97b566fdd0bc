#pragma once

// Classification (micro/macro F, ordinal distance) and extraction (MAP)
// scoring.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "deft/common.hpp"
#include "deft/corpus.hpp"

namespace deft {

struct ClassMetrics {
  int tp = 0, fp = 0, fn = 0;
  double precision = 0.0, recall = 0.0, f1 = 0.0;
};

struct ClassificationReport {
  std::size_t n = 0;
  double micro_f = 0.0;
  double macro_f = 0.0;     // mean of per-class F1
  double macro_f_pr = 0.0;  // F1 of mean precision and mean recall
  std::map<std::string, ClassMetrics> per_class;
  std::optional<double> mean_distance;

  std::string to_text() const {
    std::string out = "recipes\t" + std::to_string(n) + "\n";
    out += "micro-F   " + format_fixed(micro_f) + "\n";
    out += "macro-F   " + format_fixed(macro_f) + "\n";
    out += "macro-F(P,R) " + format_fixed(macro_f_pr) + "\n";
    if (mean_distance) out += "mean distance " + format_fixed(*mean_distance) + "\n";
    for (const auto& [c, m] : per_class)
      out += "  " + c + ": P=" + format_fixed(m.precision) + " R=" + format_fixed(m.recall) +
             " F1=" + format_fixed(m.f1) + "\n";
    return out;
  }

  std::string to_tsv() const {
    std::string out = "metric\tclass\tvalue\n";
    out += "micro_f\t*\t" + format_fixed(micro_f) + "\n";
    out += "macro_f\t*\t" + format_fixed(macro_f) + "\n";
    out += "macro_f_pr\t*\t" + format_fixed(macro_f_pr) + "\n";
    if (mean_distance) out += "mean_distance\t*\t" + format_fixed(*mean_distance) + "\n";
    for (const auto& [c, m] : per_class) {
      out += "precision\t" + c + "\t" + format_fixed(m.precision) + "\n";
      out += "recall\t" + c + "\t" + format_fixed(m.recall) + "\n";
      out += "f1\t" + c + "\t" + format_fixed(m.f1) + "\n";
    }
    return out;
  }
};

inline double safe_div(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

inline double f_measure(double p, double r) { return safe_div(2.0 * p * r, p + r); }

// `gold` maps recipe id -> gold label. `allowed` is the task's label set;
// `ranks`, when given, enables the ordinal distance.
inline ClassificationReport classification_report(const std::map<std::string, std::string>& gold,
                                                  const std::map<std::string, std::string>& predicted,
                                                  const std::set<std::string>& allowed,
                                                  const std::map<std::string, int>* ranks = nullptr) {
  ClassificationReport rep;
  rep.n = gold.size();
  std::set<std::string> classes;
  for (const auto& [id, g] : gold) {
    auto it = predicted.find(id);
    if (it == predicted.end()) throw Error(ErrorCode::Data, "eval", "missing prediction", id);
    for (const auto* l : {&g, &it->second})
      if (!allowed.count(*l)) throw Error(ErrorCode::Data, "eval", "unknown class label '" + *l + "'", id);
    classes.insert(g);
    classes.insert(it->second);
  }
  for (const auto& c : classes) rep.per_class[c] = {};
  double dist = 0.0;
  for (const auto& [id, g] : gold) {
    const std::string& p = predicted.at(id);
    if (p == g) {
      ++rep.per_class[g].tp;
    } else {
      ++rep.per_class[p].fp;
      ++rep.per_class[g].fn;
    }
    if (ranks) dist += std::abs(ranks->at(p) - ranks->at(g));
  }
  int tp = 0, fp = 0, fn = 0;
  double sum_f = 0.0, sum_p = 0.0, sum_r = 0.0;
  for (auto& [c, m] : rep.per_class) {
    m.precision = safe_div(m.tp, m.tp + m.fp);
    m.recall = safe_div(m.tp, m.tp + m.fn);
    m.f1 = f_measure(m.precision, m.recall);
    tp += m.tp;
    fp += m.fp;
    fn += m.fn;
    sum_f += m.f1;
    sum_p += m.precision;
    sum_r += m.recall;
  }
  const double k = static_cast<double>(rep.per_class.size());
  rep.micro_f = f_measure(safe_div(tp, tp + fp), safe_div(tp, tp + fn));
  rep.macro_f = safe_div(sum_f, k);
  rep.macro_f_pr = f_measure(safe_div(sum_p, k), safe_div(sum_r, k));
  if (ranks) rep.mean_distance = safe_div(dist, static_cast<double>(gold.size()));
  return rep;
}

inline ClassificationReport classification_report(const Corpus& gold,
                                                  const std::map<std::string, std::string>& predicted,
                                                  bool ordinal) {
  std::map<std::string, std::string> g;
  for (const auto& r : gold.recipes) {
    auto l = r.label(gold.label_kind);
    if (!l) throw Error(ErrorCode::Data, "eval", "gold corpus lacks a label", r.id);
    g[r.id] = *l;
  }
  std::set<std::string> allowed;
  std::map<std::string, int> ranks;
  if (gold.label_kind == LabelKind::Difficulty)
    for (int i = 0; i < 4; ++i) {
      allowed.insert(kDifficultyLabels[i]);
      ranks[kDifficultyLabels[i]] = i;
    }
  else
    for (const char* l : kDishTypeLabels) allowed.insert(l);
  if (ordinal && gold.label_kind != LabelKind::Difficulty)
    throw Error(ErrorCode::Config, "eval", "ordinal distance needs difficulty labels");
  return classification_report(g, predicted, allowed, ordinal ? &ranks : nullptr);
}

// `recipe_id<TAB>class` lines.
inline std::map<std::string, std::string> parse_label_run(const std::vector<std::string>& lines) {
  std::map<std::string, std::string> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto c = split(lines[i], '\t');
    if (c.size() != 2) throw Error(ErrorCode::Data, "eval", "bad run line " + std::to_string(i + 1));
    if (!out.emplace(c[0], c[1]).second) throw Error(ErrorCode::Data, "eval", "duplicate run entry", c[0]);
  }
  return out;
}

// ---------------------------------------------------------------------------

using RankedRun = std::map<std::string, std::vector<std::string>>;
using QrelSet = std::map<std::string, std::set<std::string>>;

enum class MatchMode { AccentPreserving, AccentFolding };

// Lowercase, trimmed, single-spaced; accents optionally folded.
inline std::string match_key(std::string_view item, MatchMode mode) {
  std::string s = to_lower_utf8(item);
  if (mode == MatchMode::AccentFolding) s = strip_accents(s);
  std::string out;
  for (const auto& p : split(trim(s), ' '))
    if (!p.empty()) out += (out.empty() ? "" : " ") + p;
  return out;
}

// (1/|gold|) * sum over relevant ranks k of precision@k.
inline double average_precision(const std::vector<std::string>& ranked, const std::set<std::string>& gold,
                                const std::string& recipe_id = {}) {
  std::set<std::string> seen;
  double hits = 0.0, sum = 0.0;
  for (std::size_t k = 0; k < ranked.size(); ++k) {
    if (!seen.insert(ranked[k]).second)
      throw Error(ErrorCode::Data, "eval", "duplicate ingredient '" + ranked[k] + "' in run list", recipe_id);
    if (gold.count(ranked[k])) {
      hits += 1.0;
      sum += hits / static_cast<double>(k + 1);
    }
  }
  return gold.empty() ? 0.0 : sum / static_cast<double>(gold.size());
}

struct MapResult {
  double map = 0.0;
  std::map<std::string, double> ap;
  std::size_t skipped_empty = 0;
};

inline MapResult mean_average_precision(const RankedRun& run, const QrelSet& qrels,
                                        MatchMode mode = MatchMode::AccentPreserving) {
  for (const auto& [id, list] : run)
    if (!qrels.count(id)) throw Error(ErrorCode::Data, "eval", "run recipe absent from qrels", id);
  MapResult res;
  double sum = 0.0;
  for (const auto& [id, gold_raw] : qrels) {
    std::set<std::string> gold;
    for (const auto& g : gold_raw) gold.insert(match_key(g, mode));
    if (gold.empty()) {
      ++res.skipped_empty;
      continue;
    }
    std::vector<std::string> ranked;
    if (auto it = run.find(id); it != run.end())
      for (const auto& item : it->second) ranked.push_back(match_key(item, mode));
    const double ap = average_precision(ranked, gold, id);
    res.ap[id] = ap;
    sum += ap;
  }
  res.map = safe_div(sum, static_cast<double>(res.ap.size()));
  return res;
}

// `recipe_id<TAB>0<TAB>ingredient<TAB>relevance`; relevance 0 lines only
// register the recipe.
inline QrelSet parse_qrels(const std::vector<std::string>& lines) {
  QrelSet q;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto c = split(lines[i], '\t');
    if (c.size() != 4) throw Error(ErrorCode::Data, "eval", "bad qrel line " + std::to_string(i + 1));
    auto& set = q[c[0]];
    if (parse_int(c[3], "eval") > 0) set.insert(c[2]);
  }
  return q;
}

inline std::string format_qrels(const Corpus& corpus) {
  std::string out;
  for (const auto& r : corpus.recipes) {
    if (!r.gold_ingredients) continue;
    std::set<std::string> uniq(r.gold_ingredients->begin(), r.gold_ingredients->end());
    for (const auto& g : uniq) out += r.id + "\t0\t" + g + "\t1\n";
  }
  return out;
}

// `recipe_id<TAB>rank<TAB>ingredient<TAB>confidence`, ordered by rank.
inline RankedRun parse_ranked_run(const std::vector<std::string>& lines) {
  std::map<std::string, std::vector<std::pair<long long, std::string>>> tmp;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto c = split(lines[i], '\t');
    if (c.size() != 4) throw Error(ErrorCode::Data, "eval", "bad run line " + std::to_string(i + 1));
    tmp[c[0]].emplace_back(parse_int(c[1], "eval"), c[2]);
  }
  RankedRun run;
  for (auto& [id, items] : tmp) {
    std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    auto& list = run[id];
    for (auto& [rank, name] : items) list.push_back(std::move(name));
  }
  return run;
}

}  // namespace deft
