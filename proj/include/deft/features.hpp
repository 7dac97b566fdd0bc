#pragma once

// Lexicon statistics (df over the whole collection, per-class df over the
// training part), tf-idf and Gini-weighted vectors, mutual-information term
// selection, and the five numeric recipe features used by boosting.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "deft/common.hpp"
#include "deft/corpus.hpp"
#include "deft/textnorm.hpp"

namespace deft {

using TermCounts = std::map<std::string, int>;

inline TermCounts term_counts(const TokenStream& tokens) {
  TermCounts tc;
  for (const auto& t : tokens) ++tc[t];
  return tc;
}

// Unigram counts of the normalized title followed by the normalized body.
inline TermCounts recipe_terms(const Recipe& r, const Normalizer& norm) {
  TermCounts tc = term_counts(norm(r.title));
  for (const auto& t : norm(r.body)) ++tc[t];
  return tc;
}

inline std::vector<TermCounts> corpus_terms(const Corpus& c, const Normalizer& norm) {
  std::vector<TermCounts> out;
  out.reserve(c.size());
  for (const auto& r : c.recipes) out.push_back(recipe_terms(r, norm));
  return out;
}

class SparseVector {
 public:
  // Zero weights are never stored.
  void set(const std::string& term, double w) {
    if (w == 0.0) entries_.erase(term);
    else entries_[term] = w;
  }

  double get(const std::string& term) const {
    auto it = entries_.find(term);
    return it == entries_.end() ? 0.0 : it->second;
  }

  double dot(const SparseVector& other) const {
    const auto& small = entries_.size() <= other.entries_.size() ? entries_ : other.entries_;
    const auto& large = &small == &entries_ ? other.entries_ : entries_;
    double s = 0.0;
    for (const auto& [t, w] : small)
      if (auto it = large.find(t); it != large.end()) s += w * it->second;
    return s;
  }

  double norm() const {
    double s = 0.0;
    for (const auto& [t, w] : entries_) s += w * w;
    return std::sqrt(s);
  }

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::map<std::string, double>& entries() const { return entries_; }

  bool operator==(const SparseVector&) const = default;

 private:
  std::map<std::string, double> entries_;
};

struct TermStats {
  int df = 0;                // documents of the whole collection
  int df_train = 0;          // documents of the training part
  std::vector<int> df_class;  // aligned with LexiconStats::classes
};

class LexiconStats {
 public:
  std::size_t corpus_size = 0;
  std::vector<std::string> classes;
  std::vector<int> class_sizes;
  std::map<std::string, TermStats> terms;

  const TermStats* find(const std::string& term) const {
    auto it = terms.find(term);
    return it == terms.end() ? nullptr : &it->second;
  }

  // ln(|X| / df); 0 for unknown terms.
  double idf(const std::string& term) const {
    const TermStats* s = find(term);
    if (!s || s->df == 0) return 0.0;
    return std::log(static_cast<double>(corpus_size) / s->df);
  }

  // sum_c (df_c / df_T)^2, absent for terms never seen in training.
  std::optional<double> gini(const std::string& term) const {
    const TermStats* s = find(term);
    if (!s || s->df_train == 0) return std::nullopt;
    return gini_of(*s);
  }

  static double gini_of(const TermStats& s) {
    double g = 0.0;
    for (int dc : s.df_class) {
      const double p = static_cast<double>(dc) / s.df_train;
      g += p * p;
    }
    return g;
  }

  int class_index(const std::string& label) const {
    auto it = std::lower_bound(classes.begin(), classes.end(), label);
    if (it == classes.end() || *it != label)
      throw Error(ErrorCode::Data, "features", "unknown class '" + label + "'");
    return static_cast<int>(it - classes.begin());
  }

  std::size_t train_size() const {
    std::size_t n = 0;
    for (int s : class_sizes) n += s;
    return n;
  }

  // Header lines then one row per term in lexicographic order:
  // term, df, df_T, df_c for each class.
  std::string to_tsv() const {
    std::string out = "#deft-stats\t1\t" + std::to_string(corpus_size) + "\n#classes";
    for (const auto& c : classes) out += "\t" + c;
    out += "\n#class_sizes";
    for (int s : class_sizes) out += "\t" + std::to_string(s);
    out += "\n";
    for (const auto& [t, s] : terms) {
      out += t + "\t" + std::to_string(s.df) + "\t" + std::to_string(s.df_train);
      for (int dc : s.df_class) out += "\t" + std::to_string(dc);
      out += "\n";
    }
    return out;
  }

  static LexiconStats from_tsv(const std::vector<std::string>& lines) {
    auto bad = [](const std::string& why) {
      return Error(ErrorCode::ModelMismatch, "features", "bad stats file: " + why);
    };
    if (lines.size() < 3) throw bad("truncated header");
    auto head = split(lines[0], '\t');
    if (head.size() != 3 || head[0] != "#deft-stats" || head[1] != "1") throw bad("version");
    LexiconStats st;
    st.corpus_size = static_cast<std::size_t>(parse_int(head[2], "features"));
    auto cls = split(lines[1], '\t');
    auto sizes = split(lines[2], '\t');
    if (cls.empty() || cls[0] != "#classes" || sizes.empty() || sizes[0] != "#class_sizes" ||
        cls.size() != sizes.size())
      throw bad("class header");
    st.classes.assign(cls.begin() + 1, cls.end());
    for (std::size_t i = 1; i < sizes.size(); ++i)
      st.class_sizes.push_back(static_cast<int>(parse_int(sizes[i], "features")));
    for (std::size_t i = 3; i < lines.size(); ++i) {
      if (lines[i].empty()) continue;
      auto cols = split(lines[i], '\t');
      if (cols.size() != 3 + st.classes.size()) throw bad("row width at line " + std::to_string(i + 1));
      TermStats s;
      s.df = static_cast<int>(parse_int(cols[1], "features"));
      s.df_train = static_cast<int>(parse_int(cols[2], "features"));
      for (std::size_t k = 3; k < cols.size(); ++k)
        s.df_class.push_back(static_cast<int>(parse_int(cols[k], "features")));
      st.terms.emplace(cols[0], std::move(s));
    }
    return st;
  }

  bool operator==(const LexiconStats& o) const {
    if (corpus_size != o.corpus_size || classes != o.classes || class_sizes != o.class_sizes ||
        terms.size() != o.terms.size())
      return false;
    for (auto a = terms.begin(), b = o.terms.begin(); a != terms.end(); ++a, ++b)
      if (a->first != b->first || a->second.df != b->second.df ||
          a->second.df_train != b->second.df_train || a->second.df_class != b->second.df_class)
        return false;
    return true;
  }
};

// df over `full`, df_T and df_c over `train`. Every training document must
// also be part of `full`; only term presence is checked here.
inline LexiconStats build_stats(std::span<const TermCounts> train,
                                std::span<const std::string> train_labels,
                                std::span<const TermCounts> full) {
  if (train.empty()) throw Error(ErrorCode::Data, "features", "empty training corpus");
  if (train.size() != train_labels.size())
    throw Error(ErrorCode::Data, "features", "label count does not match training documents");
  LexiconStats st;
  st.corpus_size = full.size();
  std::set<std::string> cls(train_labels.begin(), train_labels.end());
  st.classes.assign(cls.begin(), cls.end());
  st.class_sizes.assign(st.classes.size(), 0);
  const std::size_t k = st.classes.size();

  for (const auto& doc : full)
    for (const auto& [t, tf] : doc) {
      auto& s = st.terms[t];
      if (s.df_class.empty()) s.df_class.assign(k, 0);
      ++s.df;
    }
  for (std::size_t i = 0; i < train.size(); ++i) {
    const int c = st.class_index(train_labels[i]);
    ++st.class_sizes[c];
    for (const auto& [t, tf] : train[i]) {
      auto it = st.terms.find(t);
      if (it == st.terms.end())
        throw Error(ErrorCode::Data, "features",
                    "training term '" + t + "' missing from the full collection");
      ++it->second.df_train;
      ++it->second.df_class[c];
    }
  }
  return st;
}

inline LexiconStats build_stats(const Corpus& train, const Corpus& full, const Normalizer& norm) {
  const auto train_docs = corpus_terms(train, norm);
  const auto full_docs = corpus_terms(full, norm);
  const auto labels = train.labels();
  return build_stats(train_docs, labels, full_docs);
}

// tf * ln(|X| / df); out-of-lexicon and zero-idf terms dropped.
inline SparseVector tfidf_vector(const TermCounts& doc, const LexiconStats& stats) {
  SparseVector v;
  for (const auto& [t, tf] : doc) {
    if (!stats.find(t)) continue;
    v.set(t, tf * stats.idf(t));
  }
  return v;
}

// Recipe side: tf * idf * G over terms with G >= threshold.
inline SparseVector gini_recipe_vector(const TermCounts& doc, const LexiconStats& stats,
                                       double gini_threshold) {
  SparseVector v;
  for (const auto& [t, tf] : doc) {
    auto g = stats.gini(t);
    if (!g || *g < gini_threshold) continue;
    v.set(t, tf * stats.idf(t) * *g);
  }
  return v;
}

// Extra per-(term, class) document counts added to df_c in class vectors.
using DfBoost = std::map<std::pair<std::string, std::string>, double>;

// Class side: df_c * idf * G over terms with G >= threshold.
inline SparseVector gini_class_vector(int class_index, const LexiconStats& stats,
                                      double gini_threshold, const DfBoost* boost = nullptr) {
  SparseVector v;
  const std::string& label = stats.classes.at(class_index);
  for (const auto& [t, s] : stats.terms) {
    if (s.df_train == 0) continue;
    const double g = LexiconStats::gini_of(s);
    if (g < gini_threshold) continue;
    double dfc = s.df_class[class_index];
    if (boost)
      if (auto it = boost->find({t, label}); it != boost->end()) dfc += it->second;
    v.set(t, dfc * stats.idf(t) * g);
  }
  return v;
}

inline std::pair<SparseVector, SparseVector> gini_weighted_vectors(const TermCounts& doc,
                                                                   int class_index,
                                                                   const LexiconStats& stats,
                                                                   double gini_threshold) {
  return {gini_recipe_vector(doc, stats, gini_threshold),
          gini_class_vector(class_index, stats, gini_threshold)};
}

// Mutual information (bits) between term presence and membership of one
// class, from the 2x2 document contingency table over the training part.
inline double term_class_mi(int n11, int df_train, int class_size, int n_train) {
  const double n = n_train;
  const double cells[4] = {static_cast<double>(n11), static_cast<double>(df_train - n11),
                           static_cast<double>(class_size - n11),
                           static_cast<double>(n_train - class_size - (df_train - n11))};
  const double row[2] = {static_cast<double>(df_train), n - df_train};
  const double col[2] = {static_cast<double>(class_size), n - class_size};
  double mi = 0.0;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      const double nij = cells[r * 2 + c];
      if (nij <= 0.0) continue;
      mi += nij / n * std::log2(n * nij / (row[r] * col[c]));
    }
  return mi;
}

// Max over classes of term_class_mi.
inline double term_mi_score(const TermStats& s, const LexiconStats& stats) {
  const int n = static_cast<int>(stats.train_size());
  double best = 0.0;
  for (std::size_t c = 0; c < stats.classes.size(); ++c)
    best = std::max(best, term_class_mi(s.df_class[c], s.df_train, stats.class_sizes[c], n));
  return best;
}

// Top-k training terms by term_mi_score; ties go to the smaller term.
inline std::set<std::string> mutual_information_select(const LexiconStats& stats, std::size_t k) {
  std::vector<std::pair<double, const std::string*>> ranked;
  for (const auto& [t, s] : stats.terms)
    if (s.df_train > 0) ranked.emplace_back(term_mi_score(s, stats), &t);
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  std::set<std::string> out;
  for (std::size_t i = 0; i < ranked.size() && i < k; ++i) out.insert(*ranked[i].second);
  return out;
}

struct NumericFeatures {
  int title_word_count = 0;
  int body_word_count = 0;
  int sentence_count = 0;
  int separator_count = 0;
  int ingredient_list_size = 0;

  static constexpr int kCount = 5;
  static constexpr const char* kNames[kCount] = {"title_words", "body_words", "sentences",
                                                 "separators", "ingredients"};

  std::array<double, kCount> as_array() const {
    return {double(title_word_count), double(body_word_count), double(sentence_count),
            double(separator_count), double(ingredient_list_size)};
  }

  bool operator==(const NumericFeatures&) const = default;
};

// Maximal non-blank segments closed by '.', '!' or '?'; an unterminated
// trailing segment counts too.
inline int count_sentences(std::string_view body) {
  int count = 0;
  bool content = false;
  for (char c : body) {
    if (c == '.' || c == '!' || c == '?') {
      if (content) ++count;
      content = false;
    } else if (!std::isspace(static_cast<unsigned char>(c))) {
      content = true;
    }
  }
  return count + (content ? 1 : 0);
}

inline int count_separators(std::string_view body) {
  return static_cast<int>(std::count_if(body.begin(), body.end(), [](char c) {
    return c == '.' || c == ',' || c == ':' || c == ';' || c == '!' || c == '?';
  }));
}

inline NumericFeatures numeric_features(const Recipe& recipe,
                                        const std::vector<std::string>& ingredients,
                                        const Normalizer& norm) {
  NumericFeatures f;
  f.title_word_count = static_cast<int>(norm(recipe.title).size());
  f.body_word_count = static_cast<int>(norm(recipe.body).size());
  f.sentence_count = count_sentences(recipe.body);
  f.separator_count = count_separators(recipe.body);
  f.ingredient_list_size = static_cast<int>(ingredients.size());
  return f;
}

}  // namespace deft
