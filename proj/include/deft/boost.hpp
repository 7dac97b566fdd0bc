#pragma once

// Real-valued AdaBoost.MH with domain-partitioning stumps over three textual
// fields (title n-grams up to 3, body n-grams up to 4, ingredient unigrams)
// and five numeric recipe features.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "deft/common.hpp"
#include "deft/features.hpp"
#include "deft/scores.hpp"
#include "deft/textnorm.hpp"

namespace deft {

enum class TextField { Title = 0, Body = 1, Ingredients = 2 };
inline constexpr int kTextFields = 3;
inline constexpr const char* kTextFieldNames[kTextFields] = {"title", "body", "ingredients"};
inline constexpr int kTextFieldMaxN[kTextFields] = {3, 4, 1};

struct BoostInstance {
  std::array<std::set<std::string>, kTextFields> text;
  std::array<double, NumericFeatures::kCount> numeric{};
};

inline BoostInstance make_boost_instance(const Recipe& recipe,
                                         const std::vector<std::string>& ingredients,
                                         const Normalizer& norm) {
  BoostInstance inst;
  for (auto& g : ngrams(norm(recipe.title), kTextFieldMaxN[0])) inst.text[0].insert(std::move(g));
  for (auto& g : ngrams(norm(recipe.body), kTextFieldMaxN[1])) inst.text[1].insert(std::move(g));
  for (const auto& ing : ingredients) inst.text[2].insert(ing);
  inst.numeric = numeric_features(recipe, ingredients, norm).as_array();
  return inst;
}

struct WeakHypothesis {
  enum class Kind { TextPresence, NumericThreshold };
  Kind kind = Kind::TextPresence;
  int field = 0;
  std::string ngram;       // TextPresence
  double threshold = 0.0;  // NumericThreshold: "present" means value > threshold
  std::vector<double> votes_present;
  std::vector<double> votes_absent;

  bool fires(const BoostInstance& x) const {
    if (kind == Kind::TextPresence) return x.text[field].count(ngram) > 0;
    return x.numeric[field] > threshold;
  }

  const std::vector<double>& votes(const BoostInstance& x) const {
    return fires(x) ? votes_present : votes_absent;
  }

  bool operator==(const WeakHypothesis&) const = default;
};

struct BoostConfig {
  int max_rounds = 200;
  double smoothing_epsilon = 1e-3;
  int dev_patience = 20;

  void validate() const {
    if (max_rounds < 1) throw Error(ErrorCode::Config, "classify_boost", "max_rounds must be >= 1");
    if (!(smoothing_epsilon > 0.0))
      throw Error(ErrorCode::Config, "classify_boost", "smoothing_epsilon must be > 0");
    if (dev_patience < 1) throw Error(ErrorCode::Config, "classify_boost", "dev_patience must be >= 1");
  }
};

inline std::string boost_schema_line() {
  std::string s = "schema";
  for (int f = 0; f < kTextFields; ++f)
    s += std::string("\t") + kTextFieldNames[f] + ":" + std::to_string(kTextFieldMaxN[f]);
  s += "\tnumeric:";
  for (int i = 0; i < NumericFeatures::kCount; ++i) s += (i ? "," : "") + std::string(NumericFeatures::kNames[i]);
  return s;
}

struct BoostModel {
  std::vector<std::string> classes;
  std::vector<WeakHypothesis> rounds;

  std::vector<double> margins(const BoostInstance& x) const {
    std::vector<double> m(classes.size(), 0.0);
    for (const auto& h : rounds) {
      const auto& v = h.votes(x);
      for (std::size_t c = 0; c < m.size(); ++c) m[c] += v[c];
    }
    return m;
  }

  std::string serialize() const {
    std::string out = "deft-boost\t1\n" + boost_schema_line() + "\nclasses";
    for (const auto& c : classes) out += "\t" + c;
    out += "\nrounds\t" + std::to_string(rounds.size()) + "\n";
    auto votes = [](const std::vector<double>& v) {
      std::string s;
      for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + format_exact(v[i]);
      return s;
    };
    for (const auto& h : rounds) {
      if (h.kind == WeakHypothesis::Kind::TextPresence)
        out += std::string("text\t") + kTextFieldNames[h.field] + "\t" + h.ngram;
      else
        out += std::string("num\t") + NumericFeatures::kNames[h.field] + "\t" + format_exact(h.threshold);
      out += "\t" + votes(h.votes_present) + "\t" + votes(h.votes_absent) + "\n";
    }
    return out;
  }

  static BoostModel parse(const std::vector<std::string>& lines) {
    auto bad = [](const std::string& why) {
      return Error(ErrorCode::ModelMismatch, "classify_boost", "bad boost model: " + why);
    };
    if (lines.size() < 4 || lines[0] != "deft-boost\t1") throw bad("missing version header");
    if (lines[1] != boost_schema_line()) throw bad("feature-schema mismatch");
    auto cls = split(lines[2], '\t');
    if (cls.size() < 3 || cls[0] != "classes") throw bad("classes line");
    BoostModel m;
    m.classes.assign(cls.begin() + 1, cls.end());
    auto rl = split(lines[3], '\t');
    if (rl.size() != 2 || rl[0] != "rounds") throw bad("rounds line");
    const auto n = static_cast<std::size_t>(parse_int(rl[1], "classify_boost"));
    if (lines.size() < 4 + n) throw bad("truncated");
    auto parse_votes = [&](const std::string& s) {
      std::vector<double> v;
      for (const auto& p : split(s, ',')) v.push_back(parse_double(p, "classify_boost"));
      if (v.size() != m.classes.size()) throw bad("vote count");
      return v;
    };
    for (std::size_t i = 0; i < n; ++i) {
      auto cols = split(lines[4 + i], '\t');
      if (cols.size() != 5) throw bad("round line " + std::to_string(i + 1));
      WeakHypothesis h;
      if (cols[0] == "text") {
        h.kind = WeakHypothesis::Kind::TextPresence;
        h.field = -1;
        for (int f = 0; f < kTextFields; ++f)
          if (cols[1] == kTextFieldNames[f]) h.field = f;
        h.ngram = cols[2];
      } else if (cols[0] == "num") {
        h.kind = WeakHypothesis::Kind::NumericThreshold;
        h.field = -1;
        for (int f = 0; f < NumericFeatures::kCount; ++f)
          if (cols[1] == NumericFeatures::kNames[f]) h.field = f;
        h.threshold = parse_double(cols[2], "classify_boost");
      } else {
        throw bad("round kind '" + cols[0] + "'");
      }
      if (h.field < 0) throw bad("unknown feature field '" + cols[1] + "'");
      h.votes_present = parse_votes(cols[3]);
      h.votes_absent = parse_votes(cols[4]);
      m.rounds.push_back(std::move(h));
    }
    if (m.rounds.empty()) throw bad("no rounds");
    return m;
  }

  bool operator==(const BoostModel&) const = default;
};

// Per-round diagnostics.
struct BoostTrace {
  std::vector<double> z;               // normalizer of each kept round
  std::vector<double> weighted_error;  // of each kept round on its distribution
  std::vector<double> dev_micro_f;     // after each trained round (dev non-empty)
  std::size_t chosen_rounds = 0;
  bool halted = false;  // no hypothesis beat 0.5 weighted error
};

namespace detail {

// Text candidates come first, ordered by (field, n-gram); numeric ones after,
// ordered by (field, threshold). The first minimum in this order wins.
struct BoostCandidate {
  WeakHypothesis::Kind kind;
  int field;
  std::string ngram;
  double threshold = 0.0;
  std::vector<std::uint32_t> present;  // ascending example indices
};

inline std::vector<BoostCandidate> boost_candidates(std::span<const BoostInstance> train) {
  std::vector<BoostCandidate> out;
  for (int f = 0; f < kTextFields; ++f) {
    std::map<std::string, std::vector<std::uint32_t>> postings;
    for (std::uint32_t i = 0; i < train.size(); ++i)
      for (const auto& g : train[i].text[f]) postings[g].push_back(i);
    for (auto& [g, docs] : postings)
      if (docs.size() >= 2)
        out.push_back({WeakHypothesis::Kind::TextPresence, f, g, 0.0, std::move(docs)});
  }
  for (int f = 0; f < NumericFeatures::kCount; ++f) {
    std::set<double> values;
    for (const auto& x : train) values.insert(x.numeric[f]);
    for (auto it = values.begin(); it != values.end() && std::next(it) != values.end(); ++it) {
      const double theta = (*it + *std::next(it)) / 2.0;
      BoostCandidate c{WeakHypothesis::Kind::NumericThreshold, f, {}, theta, {}};
      for (std::uint32_t i = 0; i < train.size(); ++i)
        if (train[i].numeric[f] > theta) c.present.push_back(i);
      out.push_back(std::move(c));
    }
  }
  return out;
}

inline double smoothed_vote(double w_pos, double w_neg, double eps) {
  return 0.5 * std::log((w_pos + eps) / (w_neg + eps));
}

}  // namespace detail

// Trains on `train`; when `dev` is non-empty, the kept round count is the one
// with the best dev micro-F (earliest on ties) and training stops after
// `dev_patience` rounds without improvement.
inline BoostModel train_boost(std::span<const BoostInstance> train,
                              std::span<const std::string> labels,
                              std::span<const BoostInstance> dev,
                              std::span<const std::string> dev_labels, const BoostConfig& config,
                              BoostTrace* trace = nullptr) {
  config.validate();
  if (train.empty()) throw Error(ErrorCode::Data, "classify_boost", "empty training corpus");
  if (labels.size() != train.size() || dev_labels.size() != dev.size())
    throw Error(ErrorCode::Data, "classify_boost", "label count mismatch");
  std::set<std::string> cls(labels.begin(), labels.end());
  if (cls.size() < 2)
    throw Error(ErrorCode::Data, "classify_boost", "training corpus has a single class");

  BoostModel model;
  model.classes.assign(cls.begin(), cls.end());
  const std::size_t m = train.size();
  const std::size_t k = model.classes.size();
  auto class_of = [&](const std::string& l) {
    return static_cast<std::size_t>(
        std::lower_bound(model.classes.begin(), model.classes.end(), l) - model.classes.begin());
  };
  std::vector<std::size_t> y(m);
  for (std::size_t i = 0; i < m; ++i) y[i] = class_of(labels[i]);
  std::vector<std::size_t> dev_y(dev.size());
  for (std::size_t i = 0; i < dev.size(); ++i) {
    dev_y[i] = class_of(dev_labels[i]);
    if (dev_y[i] >= k || model.classes[dev_y[i]] != dev_labels[i])
      throw Error(ErrorCode::Data, "classify_boost", "dev class '" + dev_labels[i] + "' unseen in training");
  }

  const auto candidates = detail::boost_candidates(train);
  const double eps = config.smoothing_epsilon;

  // weights[i*k + l]
  std::vector<double> weights(m * k, 1.0 / static_cast<double>(m * k));
  std::vector<double> dev_margin(dev.size() * k, 0.0);
  double best_f = -1.0;
  std::size_t best_rounds = 0;
  int since_best = 0;
  BoostTrace local;

  for (int round = 0; round < config.max_rounds; ++round) {
    std::vector<double> tot_pos(k, 0.0), tot_neg(k, 0.0);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t l = 0; l < k; ++l) (y[i] == l ? tot_pos : tot_neg)[l] += weights[i * k + l];

    double best_z = std::numeric_limits<double>::infinity();
    std::size_t best_c = candidates.size();
    std::vector<double> pp(k), pn(k);
    for (std::size_t ci = 0; ci < candidates.size(); ++ci) {
      std::fill(pp.begin(), pp.end(), 0.0);
      std::fill(pn.begin(), pn.end(), 0.0);
      for (std::uint32_t i : candidates[ci].present)
        for (std::size_t l = 0; l < k; ++l) (y[i] == l ? pp : pn)[l] += weights[i * k + l];
      double z = 0.0;
      for (std::size_t l = 0; l < k; ++l) {
        const double ap = std::max(0.0, tot_pos[l] - pp[l]);
        const double an = std::max(0.0, tot_neg[l] - pn[l]);
        const double cp = detail::smoothed_vote(pp[l], pn[l], eps);
        const double ca = detail::smoothed_vote(ap, an, eps);
        z += pp[l] * std::exp(-cp) + pn[l] * std::exp(cp) + ap * std::exp(-ca) + an * std::exp(ca);
      }
      if (z < best_z) {
        best_z = z;
        best_c = ci;
      }
    }
    if (best_c == candidates.size()) {
      local.halted = true;
      break;
    }

    const auto& cand = candidates[best_c];
    WeakHypothesis h;
    h.kind = cand.kind;
    h.field = cand.field;
    h.ngram = cand.ngram;
    h.threshold = cand.threshold;
    std::fill(pp.begin(), pp.end(), 0.0);
    std::fill(pn.begin(), pn.end(), 0.0);
    for (std::uint32_t i : cand.present)
      for (std::size_t l = 0; l < k; ++l) (y[i] == l ? pp : pn)[l] += weights[i * k + l];
    double error = 0.0;
    auto block_error = [](double c, double wp, double wn) {
      return c > 0 ? wn : c < 0 ? wp : 0.5 * (wp + wn);
    };
    for (std::size_t l = 0; l < k; ++l) {
      const double ap = std::max(0.0, tot_pos[l] - pp[l]);
      const double an = std::max(0.0, tot_neg[l] - pn[l]);
      h.votes_present.push_back(detail::smoothed_vote(pp[l], pn[l], eps));
      h.votes_absent.push_back(detail::smoothed_vote(ap, an, eps));
      error += block_error(h.votes_present[l], pp[l], pn[l]) + block_error(h.votes_absent[l], ap, an);
    }
    if (!(error < 0.5)) {
      local.halted = true;
      break;
    }

    std::vector<bool> fires(m, false);
    for (std::uint32_t i : cand.present) fires[i] = true;
    double z = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
      const auto& v = fires[i] ? h.votes_present : h.votes_absent;
      for (std::size_t l = 0; l < k; ++l) {
        const double sign = y[i] == l ? 1.0 : -1.0;
        weights[i * k + l] *= std::exp(-sign * v[l]);
        z += weights[i * k + l];
      }
    }
    for (double& w : weights) w /= z;
    local.z.push_back(z);
    local.weighted_error.push_back(error);
    model.rounds.push_back(std::move(h));

    if (!dev.empty()) {
      const auto& hr = model.rounds.back();
      std::size_t correct = 0;
      for (std::size_t i = 0; i < dev.size(); ++i) {
        const auto& v = hr.votes(dev[i]);
        std::size_t arg = 0;
        for (std::size_t l = 0; l < k; ++l) {
          dev_margin[i * k + l] += v[l];
          if (dev_margin[i * k + l] > dev_margin[i * k + arg]) arg = l;
        }
        if (arg == dev_y[i]) ++correct;
      }
      const double f = static_cast<double>(correct) / dev.size();
      local.dev_micro_f.push_back(f);
      if (f > best_f) {
        best_f = f;
        best_rounds = model.rounds.size();
        since_best = 0;
      } else if (++since_best >= config.dev_patience) {
        break;
      }
    }
  }

  if (model.rounds.empty())
    throw Error(ErrorCode::Data, "classify_boost", "no weak hypothesis beats chance on the training set");
  if (!dev.empty()) model.rounds.resize(best_rounds);
  local.chosen_rounds = model.rounds.size();
  if (trace) *trace = std::move(local);
  return model;
}

// Logistic of twice the summed vote per class.
inline std::vector<double> boost_confidences(const BoostModel& model, const BoostInstance& x) {
  std::vector<double> conf = model.margins(x);
  for (double& m : conf) m = 1.0 / (1.0 + std::exp(-2.0 * m));
  return conf;
}

inline ScoreVector score_boost(const BoostModel& model, const BoostInstance& x,
                               std::string recipe_id = {}) {
  for (const auto& h : model.rounds) {
    const int limit = h.kind == WeakHypothesis::Kind::TextPresence ? kTextFields : NumericFeatures::kCount;
    if (h.field < 0 || h.field >= limit || h.votes_present.size() != model.classes.size() ||
        h.votes_absent.size() != model.classes.size())
      throw Error(ErrorCode::ModelMismatch, "classify_boost", "feature-schema mismatch", recipe_id);
  }
  return make_score_vector(std::move(recipe_id), "boost", model.classes, boost_confidences(model, x));
}

}  // namespace deft
