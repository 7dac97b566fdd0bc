#pragma once

// One-vs-one linear SVMs on tf-idf vectors, trained with a primal stochastic
// subgradient method (step 1/(lambda*t)), aggregated by summing each class's
// oriented pair margins.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "deft/common.hpp"
#include "deft/features.hpp"
#include "deft/scores.hpp"

namespace deft {

struct SvmConfig {
  double lambda = 1e-4;
  int epochs = 20;
  std::uint64_t seed = 1;

  void validate() const {
    if (!(lambda > 0.0)) throw Error(ErrorCode::Config, "classify_svm", "lambda must be > 0");
    if (epochs < 1) throw Error(ErrorCode::Config, "classify_svm", "epochs must be >= 1");
  }
};

struct PairModel {
  std::string first;   // label +1
  std::string second;  // label -1
  SparseVector weights;
  double bias = 0.0;

  // Positive means `first`.
  double margin(const SparseVector& x) const { return weights.dot(x) + bias; }

  // Same decision function, oriented toward `second`.
  PairModel mirrored() const {
    PairModel m{second, first, {}, -bias};
    for (const auto& [t, w] : weights.entries()) m.weights.set(t, -w);
    return m;
  }

  bool operator==(const PairModel&) const = default;
};

struct OvoModel {
  std::vector<std::string> classes;
  std::vector<PairModel> pairs;  // (classes[a], classes[b]) for a < b, row-major
  std::optional<std::set<std::string>> vocab_filter;

  // Drops out-of-filter terms before scoring.
  SparseVector restrict(const SparseVector& x) const {
    if (!vocab_filter) return x;
    SparseVector out;
    for (const auto& [t, w] : x.entries())
      if (vocab_filter->count(t)) out.set(t, w);
    return out;
  }

  std::string serialize() const {
    std::string out = "deft-svm\t1\nclasses";
    for (const auto& c : classes) out += "\t" + c;
    out += "\nfilter\t" + (vocab_filter ? std::to_string(vocab_filter->size()) : std::string("none")) + "\n";
    if (vocab_filter)
      for (const auto& t : *vocab_filter) out += t + "\n";
    for (const auto& p : pairs) {
      out += "pair\t" + p.first + "\t" + p.second + "\t" + format_exact(p.bias) + "\t" +
             std::to_string(p.weights.size()) + "\n";
      for (const auto& [t, w] : p.weights.entries()) out += t + "\t" + format_exact(w) + "\n";
    }
    return out;
  }

  static OvoModel parse(const std::vector<std::string>& lines) {
    auto bad = [](const std::string& why) {
      return Error(ErrorCode::ModelMismatch, "classify_svm", "bad svm model: " + why);
    };
    std::size_t at = 0;
    auto next = [&]() -> const std::string& {
      if (at >= lines.size()) throw bad("truncated");
      return lines[at++];
    };
    if (next() != "deft-svm\t1") throw bad("missing version header");
    OvoModel m;
    auto cls = split(next(), '\t');
    if (cls.size() < 3 || cls[0] != "classes") throw bad("classes line");
    m.classes.assign(cls.begin() + 1, cls.end());
    auto filt = split(next(), '\t');
    if (filt.size() != 2 || filt[0] != "filter") throw bad("filter line");
    if (filt[1] != "none") {
      const auto n = parse_int(filt[1], "classify_svm");
      std::set<std::string> f;
      for (long long i = 0; i < n; ++i) f.insert(next());
      m.vocab_filter = std::move(f);
    }
    const std::size_t npairs = m.classes.size() * (m.classes.size() - 1) / 2;
    for (std::size_t p = 0; p < npairs; ++p) {
      auto head = split(next(), '\t');
      if (head.size() != 5 || head[0] != "pair") throw bad("pair header");
      PairModel pm{head[1], head[2], {}, parse_double(head[3], "classify_svm")};
      const auto n = parse_int(head[4], "classify_svm");
      for (long long i = 0; i < n; ++i) {
        auto cols = split(next(), '\t');
        if (cols.size() != 2) throw bad("weight line");
        pm.weights.set(cols[0], parse_double(cols[1], "classify_svm"));
      }
      m.pairs.push_back(std::move(pm));
    }
    return m;
  }

  bool operator==(const OvoModel&) const = default;
};

// Stochastic subgradient descent on
//   lambda/2 |w|^2 + mean_i max(0, 1 - y_i (w.x_i + b)).
// The bias is handled as a weight on a constant feature of value 1 and is
// regularized with the rest. Step t uses eta = 1/(lambda t); the example order
// of every epoch is a fresh Fisher-Yates shuffle from `rng`.
inline PairModel train_pair(const std::string& first, const std::string& second,
                            const std::vector<const SparseVector*>& xs, const std::vector<int>& ys,
                            const SvmConfig& config, SplitMix64& rng) {
  std::unordered_map<std::string, std::size_t> index;
  std::vector<std::string> terms;
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i)
    for (const auto& [t, w] : xs[i]->entries()) {
      auto [it, fresh] = index.emplace(t, terms.size());
      if (fresh) terms.push_back(t);
      rows[i].emplace_back(it->second, w);
    }

  // w = scale * v; the decay step multiplies scale only.
  std::vector<double> v(terms.size(), 0.0);
  double vb = 0.0;
  double scale = 1.0;
  std::vector<std::size_t> order(xs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::uint64_t t = 0;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    deterministic_shuffle(order, rng);
    for (std::size_t i : order) {
      ++t;
      const double eta = 1.0 / (config.lambda * static_cast<double>(t));
      double dot = vb;
      for (const auto& [j, x] : rows[i]) dot += v[j] * x;
      const double margin = ys[i] * scale * dot;
      const double decay = 1.0 - eta * config.lambda;
      if (decay <= 0.0) {
        std::fill(v.begin(), v.end(), 0.0);
        vb = 0.0;
        scale = 1.0;
      } else {
        scale *= decay;
      }
      if (margin < 1.0) {
        const double step = eta * ys[i] / scale;
        for (const auto& [j, x] : rows[i]) v[j] += step * x;
        vb += step;
      }
    }
  }
  PairModel pm{first, second, {}, scale * vb};
  for (std::size_t j = 0; j < terms.size(); ++j) pm.weights.set(terms[j], scale * v[j]);
  return pm;
}

// `docs` are tf-idf vectors of the training recipes (see tfidf_vector).
inline OvoModel train_ovo(std::span<const SparseVector> docs, std::span<const std::string> labels,
                          const SvmConfig& config,
                          std::optional<std::set<std::string>> vocab_filter = std::nullopt) {
  config.validate();
  if (docs.size() != labels.size())
    throw Error(ErrorCode::Data, "classify_svm", "label count mismatch");
  std::set<std::string> cls(labels.begin(), labels.end());
  if (cls.size() < 2) throw Error(ErrorCode::Data, "classify_svm", "need at least 2 classes");
  OvoModel model;
  model.classes.assign(cls.begin(), cls.end());
  model.vocab_filter = std::move(vocab_filter);

  std::vector<SparseVector> xs;
  xs.reserve(docs.size());
  for (const auto& d : docs) xs.push_back(model.restrict(d));

  SplitMix64 rng(config.seed);
  for (std::size_t a = 0; a < model.classes.size(); ++a)
    for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
      std::vector<const SparseVector*> px;
      std::vector<int> py;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        if (labels[i] == model.classes[a]) {
          px.push_back(&xs[i]);
          py.push_back(+1);
        } else if (labels[i] == model.classes[b]) {
          px.push_back(&xs[i]);
          py.push_back(-1);
        }
      }
      model.pairs.push_back(train_pair(model.classes[a], model.classes[b], px, py, config, rng));
    }
  return model;
}

inline OvoModel train_ovo(const Corpus& train, const LexiconStats& stats, const Normalizer& norm,
                          const SvmConfig& config,
                          std::optional<std::set<std::string>> vocab_filter = std::nullopt) {
  if (train.label_kind == LabelKind::None)
    throw Error(ErrorCode::Data, "classify_svm", "training corpus is unlabeled");
  std::vector<SparseVector> docs;
  for (const auto& r : train.recipes) docs.push_back(tfidf_vector(recipe_terms(r, norm), stats));
  const auto labels = train.labels();
  return train_ovo(docs, labels, config, std::move(vocab_filter));
}

// score(c) = sum over the pairs containing c of the margin oriented toward c.
inline std::vector<double> ovo_scores(const OvoModel& model, const SparseVector& x) {
  const SparseVector xr = model.restrict(x);
  std::vector<double> s(model.classes.size(), 0.0);
  std::size_t p = 0;
  for (std::size_t a = 0; a < model.classes.size(); ++a)
    for (std::size_t b = a + 1; b < model.classes.size(); ++b, ++p) {
      const double m = model.pairs[p].margin(xr);
      s[a] += m;
      s[b] -= m;
    }
  return s;
}

inline ScoreVector score_ovo(const OvoModel& model, const SparseVector& tfidf,
                             std::string recipe_id = {}) {
  return make_score_vector(std::move(recipe_id), "svm", model.classes, ovo_scores(model, tfidf));
}

}  // namespace deft
