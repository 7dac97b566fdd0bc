#pragma once

// Gini-weighted cosine classifier and its hierarchical two-feed variant.

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "deft/common.hpp"
#include "deft/features.hpp"
#include "deft/fusion.hpp"
#include "deft/scores.hpp"

namespace deft {

// Standard: dot / (|v_r| |v_c|). Literal: dot / sqrt(sum over shared terms of
// w_r^2 w_c^2), the denominator as printed in the original formula.
enum class DenominatorMode { Standard, Literal };

inline const char* to_string(DenominatorMode m) {
  return m == DenominatorMode::Standard ? "standard" : "literal";
}

inline DenominatorMode parse_denominator_mode(const std::string& s) {
  if (s == "standard") return DenominatorMode::Standard;
  if (s == "literal") return DenominatorMode::Literal;
  throw Error(ErrorCode::Config, "classify_cosine", "unknown denominator mode '" + s + "'");
}

// `term<TAB>class<TAB>extra_df` lines.
inline DfBoost parse_df_boost(const std::vector<std::string>& lines) {
  DfBoost boost;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty() || lines[i][0] == '#') continue;
    auto cols = split(lines[i], '\t');
    if (cols.size() != 3)
      throw Error(ErrorCode::Config, "classify_cosine",
                  "boost line " + std::to_string(i + 1) + " is not term<TAB>class<TAB>count");
    boost[{cols[0], cols[1]}] += parse_double(cols[2], "classify_cosine");
  }
  return boost;
}

struct CosineModel {
  std::shared_ptr<const LexiconStats> stats;
  double gini_threshold = 0.45;
  DenominatorMode mode = DenominatorMode::Standard;
  DfBoost boost;
  std::vector<SparseVector> class_vectors;  // aligned with stats->classes
  std::vector<std::string> empty_classes;   // classes with no surviving term

  const std::vector<std::string>& classes() const { return stats->classes; }

  // Class vectors are derived data; serialization stores only their inputs.
  std::string serialize() const {
    std::string out = "deft-cosine\t1\nthreshold\t" + format_exact(gini_threshold) + "\nmode\t" +
                      to_string(mode) + "\nboost\t" + std::to_string(boost.size()) + "\n";
    for (const auto& [key, n] : boost) out += key.first + "\t" + key.second + "\t" + format_exact(n) + "\n";
    out += stats->to_tsv();
    return out;
  }

  static CosineModel parse(const std::vector<std::string>& lines);
};

inline CosineModel train_cosine(std::shared_ptr<const LexiconStats> stats, double gini_threshold,
                                DenominatorMode mode = DenominatorMode::Standard,
                                DfBoost boost = {}) {
  if (!(gini_threshold >= 0.0 && gini_threshold <= 1.0))
    throw Error(ErrorCode::Config, "classify_cosine", "gini threshold must lie in [0,1]");
  CosineModel m;
  m.stats = std::move(stats);
  m.gini_threshold = gini_threshold;
  m.mode = mode;
  m.boost = std::move(boost);
  for (std::size_t c = 0; c < m.stats->classes.size(); ++c) {
    m.class_vectors.push_back(
        gini_class_vector(static_cast<int>(c), *m.stats, gini_threshold, m.boost.empty() ? nullptr : &m.boost));
    if (m.class_vectors.back().empty()) m.empty_classes.push_back(m.stats->classes[c]);
  }
  return m;
}

inline CosineModel CosineModel::parse(const std::vector<std::string>& lines) {
  auto bad = [](const std::string& why) {
    return Error(ErrorCode::ModelMismatch, "classify_cosine", "bad cosine model: " + why);
  };
  if (lines.size() < 4 || lines[0] != "deft-cosine\t1") throw bad("missing version header");
  auto th = split(lines[1], '\t');
  auto mo = split(lines[2], '\t');
  auto bo = split(lines[3], '\t');
  if (th.size() != 2 || th[0] != "threshold" || mo.size() != 2 || mo[0] != "mode" || bo.size() != 2 ||
      bo[0] != "boost")
    throw bad("header");
  const auto nboost = static_cast<std::size_t>(parse_int(bo[1], "classify_cosine"));
  if (lines.size() < 4 + nboost) throw bad("truncated");
  DfBoost boost = parse_df_boost({lines.begin() + 4, lines.begin() + 4 + nboost});
  auto stats = std::make_shared<LexiconStats>(
      LexiconStats::from_tsv({lines.begin() + 4 + nboost, lines.end()}));
  return train_cosine(std::move(stats), parse_double(th[1], "classify_cosine"),
                      parse_denominator_mode(mo[1]), std::move(boost));
}

// One score per class in class order; empty intersections score 0.
inline std::vector<double> cosine_scores(const CosineModel& model, const TermCounts& doc) {
  const SparseVector vr = gini_recipe_vector(doc, *model.stats, model.gini_threshold);
  std::vector<double> out;
  const double nr = vr.norm();
  for (const auto& vc : model.class_vectors) {
    double dot = 0.0, literal = 0.0;
    for (const auto& [t, wr] : vr.entries()) {
      const double wc = vc.get(t);
      if (wc == 0.0) continue;
      dot += wr * wc;
      literal += wr * wr * wc * wc;
    }
    double s = 0.0;
    if (dot != 0.0) {
      s = model.mode == DenominatorMode::Standard ? dot / (nr * vc.norm()) : dot / std::sqrt(literal);
    }
    out.push_back(s);
  }
  return out;
}

inline ScoreVector score_cosine(const CosineModel& model, const TermCounts& doc, std::string recipe_id = {}) {
  return make_score_vector(std::move(recipe_id), "cosine", model.classes(), cosine_scores(model, doc));
}

// ---------------------------------------------------------------------------
// Hierarchical mode.

// Stage k maps every leaf label to its group at depth k+1. Each stage must
// refine the previous one and the last stage must separate all leaves.
struct HierarchyStage {
  std::map<std::string, std::string> grouping;
  double alpha = 0.5;  // weight of the title-only feed

  bool operator==(const HierarchyStage&) const = default;
};

struct HierarchySpec {
  std::vector<HierarchyStage> stages;

  std::vector<std::string> leaves() const {
    std::vector<std::string> out;
    if (!stages.empty())
      for (const auto& [leaf, g] : stages.front().grouping) out.push_back(leaf);
    return out;
  }

  // Group of `leaf` at depth `stage` (stage -1 is the root "").
  std::string group(int stage, const std::string& leaf) const {
    if (stage < 0) return {};
    return stages.at(stage).grouping.at(leaf);
  }

  void validate(const std::vector<std::string>& classes) const {
    auto fail = [](const std::string& why) {
      return Error(ErrorCode::Config, "classify_cosine", "inconsistent hierarchy: " + why);
    };
    if (stages.empty()) throw fail("no stage");
    for (std::size_t k = 0; k < stages.size(); ++k) {
      const auto& st = stages[k];
      if (!(st.alpha >= 0.0 && st.alpha <= 1.0)) throw fail("alpha outside [0,1]");
      for (const auto& c : classes)
        if (!st.grouping.count(c)) throw fail("leaf '" + c + "' unreachable at stage " + std::to_string(k + 1));
      for (const auto& [leaf, g] : st.grouping)
        if (std::find(classes.begin(), classes.end(), leaf) == classes.end())
          throw fail("unknown leaf '" + leaf + "'");
      if (k > 0) {
        std::map<std::string, std::string> parent_of;
        for (const auto& [leaf, g] : st.grouping) {
          const std::string p = stages[k - 1].grouping.at(leaf);
          auto [it, fresh] = parent_of.emplace(g, p);
          if (!fresh && it->second != p) throw fail("stage " + std::to_string(k + 1) + " does not refine");
        }
      }
    }
    std::set<std::string> last;
    for (const auto& [leaf, g] : stages.back().grouping)
      if (!last.insert(g).second) throw fail("leaf unreachable: final stage merges '" + g + "'");
  }

  // `stage <alpha>` opens a stage; following lines are `leaf<TAB>group`.
  static HierarchySpec parse(const std::vector<std::string>& lines) {
    HierarchySpec spec;
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::string& line = lines[i];
      if (trim(line).empty() || line[0] == '#') continue;
      if (line.rfind("stage", 0) == 0 && line.find('\t') == std::string::npos) {
        HierarchyStage st;
        const std::string rest = trim(line.substr(5));
        if (!rest.empty()) st.alpha = parse_double(rest, "classify_cosine");
        spec.stages.push_back(std::move(st));
        continue;
      }
      auto cols = split(line, '\t');
      if (cols.size() != 2 || spec.stages.empty())
        throw Error(ErrorCode::Config, "classify_cosine", "bad hierarchy line " + std::to_string(i + 1));
      spec.stages.back().grouping[trim(cols[0])] = trim(cols[1]);
    }
    return spec;
  }

  std::string serialize() const {
    std::string out;
    for (const auto& st : stages) {
      out += "stage " + format_exact(st.alpha) + "\n";
      for (const auto& [leaf, g] : st.grouping) out += leaf + "\t" + g + "\n";
    }
    return out;
  }

  // easy|difficult, then each half split in two.
  static HierarchySpec difficulty(double alpha = 0.5) {
    HierarchySpec s;
    s.stages.push_back({{{"Très facile", "facile"}, {"Facile", "facile"},
                         {"Moyennement difficile", "difficile"}, {"Difficile", "difficile"}},
                        alpha});
    s.stages.push_back({{{"Très facile", "Très facile"}, {"Facile", "Facile"},
                         {"Moyennement difficile", "Moyennement difficile"}, {"Difficile", "Difficile"}},
                        alpha});
    return s;
  }

  // dessert|savoury, then starter vs main course.
  static HierarchySpec dish_type(double alpha = 0.5) {
    HierarchySpec s;
    s.stages.push_back({{{"Dessert", "Dessert"}, {"Entrée", "salé"}, {"Plat principal", "salé"}}, alpha});
    s.stages.push_back(
        {{{"Dessert", "Dessert"}, {"Entrée", "Entrée"}, {"Plat principal", "Plat principal"}}, alpha});
    return s;
  }

  bool operator==(const HierarchySpec&) const = default;
};

enum class Feed { TitleOnly = 0, TitleAndBody = 1 };
inline constexpr const char* kFeedNames[2] = {"title", "title_body"};

// Feed-specific term counts of one recipe.
struct FeedTerms {
  TermCounts title;
  TermCounts title_body;

  const TermCounts& get(Feed f) const { return f == Feed::TitleOnly ? title : title_body; }
};

inline FeedTerms feed_terms(const Recipe& r, const Normalizer& norm) {
  return {term_counts(norm(r.title)), recipe_terms(r, norm)};
}

// The decision taken at one tree node: which child group of `parent` at
// depth `stage`.
struct HierarchyNode {
  int stage = 0;
  std::string parent;
  std::vector<std::string> children;  // sorted
  std::optional<CosineModel> models[2];  // per feed; absent when one child only
};

struct HierarchicalModel {
  HierarchySpec spec;
  std::vector<std::string> leaves;
  std::vector<HierarchyNode> nodes;

  const HierarchyNode& node(int stage, const std::string& parent) const {
    for (const auto& n : nodes)
      if (n.stage == stage && n.parent == parent) return n;
    throw Error(ErrorCode::ModelMismatch, "classify_cosine", "missing hierarchy node");
  }

  std::string serialize() const {
    std::string out = "deft-hier\t1\n";
    const std::string spec_text = spec.serialize();
    out += "spec\t" + std::to_string(std::count(spec_text.begin(), spec_text.end(), '\n')) + "\n" + spec_text;
    for (const auto& n : nodes)
      for (int f = 0; f < 2; ++f) {
        if (!n.models[f]) continue;
        const std::string body = n.models[f]->serialize();
        out += "node\t" + std::to_string(n.stage) + "\t" + n.parent + "\t" + kFeedNames[f] + "\t" +
               std::to_string(std::count(body.begin(), body.end(), '\n')) + "\n" + body;
      }
    return out;
  }

  static HierarchicalModel parse(const std::vector<std::string>& lines);
};

inline std::vector<std::string> hierarchy_children(const HierarchySpec& spec, int stage,
                                                   const std::string& parent) {
  std::set<std::string> ch;
  for (const auto& [leaf, g] : spec.stages.at(stage).grouping)
    if (spec.group(stage - 1, leaf) == parent) ch.insert(g);
  return {ch.begin(), ch.end()};
}

inline std::vector<HierarchyNode> hierarchy_skeleton(const HierarchySpec& spec) {
  std::vector<HierarchyNode> nodes;
  for (int k = 0; k < static_cast<int>(spec.stages.size()); ++k) {
    std::set<std::string> parents;
    for (const auto& [leaf, g] : spec.stages[k].grouping) parents.insert(spec.group(k - 1, leaf));
    for (const auto& p : parents) {
      HierarchyNode n;
      n.stage = k;
      n.parent = p;
      n.children = hierarchy_children(spec, k, p);
      nodes.push_back(std::move(n));
    }
  }
  return nodes;
}

inline HierarchicalModel HierarchicalModel::parse(const std::vector<std::string>& lines) {
  auto bad = [](const std::string& why) {
    return Error(ErrorCode::ModelMismatch, "classify_cosine", "bad hierarchy model: " + why);
  };
  if (lines.size() < 2 || lines[0] != "deft-hier\t1") throw bad("missing version header");
  auto sp = split(lines[1], '\t');
  if (sp.size() != 2 || sp[0] != "spec") throw bad("spec header");
  std::size_t at = 2;
  const auto nspec = static_cast<std::size_t>(parse_int(sp[1], "classify_cosine"));
  if (lines.size() < at + nspec) throw bad("truncated spec");
  HierarchicalModel m;
  m.spec = HierarchySpec::parse({lines.begin() + at, lines.begin() + at + nspec});
  at += nspec;
  m.leaves = m.spec.leaves();
  m.spec.validate(m.leaves);
  m.nodes = hierarchy_skeleton(m.spec);
  while (at < lines.size()) {
    if (lines[at].empty()) {
      ++at;
      continue;
    }
    auto h = split(lines[at], '\t');
    if (h.size() != 5 || h[0] != "node") throw bad("node header");
    const int stage = static_cast<int>(parse_int(h[1], "classify_cosine"));
    const int feed = h[3] == kFeedNames[0] ? 0 : h[3] == kFeedNames[1] ? 1 : -1;
    if (feed < 0) throw bad("feed");
    const auto n = static_cast<std::size_t>(parse_int(h[4], "classify_cosine"));
    if (lines.size() < at + 1 + n) throw bad("truncated node");
    auto model = CosineModel::parse({lines.begin() + at + 1, lines.begin() + at + 1 + n});
    bool placed = false;
    for (auto& node : m.nodes)
      if (node.stage == stage && node.parent == h[2]) {
        node.models[feed] = std::move(model);
        placed = true;
        break;
      }
    if (!placed) throw bad("node not in spec");
    at += 1 + n;
  }
  return m;
}

// Trains one cosine model per (node, feed) on the training recipes below the
// node, labeled with their group at the node's depth. `full` supplies df.
inline HierarchicalModel train_hierarchical(const std::vector<FeedTerms>& train,
                                            const std::vector<std::string>& labels,
                                            const std::vector<FeedTerms>& full, const HierarchySpec& spec,
                                            double gini_threshold,
                                            DenominatorMode mode = DenominatorMode::Standard) {
  HierarchicalModel m;
  m.spec = spec;
  std::set<std::string> leaves(labels.begin(), labels.end());
  m.leaves = spec.leaves();
  for (const auto& l : leaves)
    if (!std::count(m.leaves.begin(), m.leaves.end(), l))
      throw Error(ErrorCode::Config, "classify_cosine", "inconsistent hierarchy: leaf '" + l + "' unreachable");
  spec.validate(m.leaves);
  m.nodes = hierarchy_skeleton(spec);

  std::vector<TermCounts> full_feed[2];
  for (const auto& f : full) {
    full_feed[0].push_back(f.title);
    full_feed[1].push_back(f.title_body);
  }
  for (auto& node : m.nodes) {
    if (node.children.size() < 2) continue;
    std::vector<TermCounts> docs[2];
    std::vector<std::string> sub_labels;
    for (std::size_t i = 0; i < train.size(); ++i) {
      if (spec.group(node.stage - 1, labels[i]) != node.parent) continue;
      docs[0].push_back(train[i].title);
      docs[1].push_back(train[i].title_body);
      sub_labels.push_back(spec.group(node.stage, labels[i]));
    }
    if (sub_labels.empty()) continue;
    for (int f = 0; f < 2; ++f) {
      auto stats = std::make_shared<LexiconStats>(build_stats(docs[f], sub_labels, full_feed[f]));
      node.models[f] = train_cosine(std::move(stats), gini_threshold, mode);
    }
  }
  return m;
}

// Sum-to-one distribution over `node.children` from one feed.
inline std::vector<double> node_feed_distribution(const HierarchyNode& node, Feed feed,
                                                  const FeedTerms& doc) {
  ScoreVector raw;
  for (const auto& c : node.children) raw.scores[c] = 0.0;
  const auto& model = node.models[static_cast<int>(feed)];
  if (model) {
    const auto s = cosine_scores(*model, doc.get(feed));
    for (std::size_t i = 0; i < model->classes().size(); ++i) raw.scores[model->classes()[i]] = s[i];
  }
  const ScoreVector n = normalize_scores(raw);
  std::vector<double> out;
  for (const auto& c : node.children) out.push_back(n.scores.at(c));
  return out;
}

// Mixed distribution alpha*title + (1-alpha)*title_body over the children.
inline std::vector<double> node_distribution(const HierarchicalModel& m, const HierarchyNode& node,
                                             const FeedTerms& doc) {
  const double alpha = m.spec.stages.at(node.stage).alpha;
  const auto t = node_feed_distribution(node, Feed::TitleOnly, doc);
  const auto tb = node_feed_distribution(node, Feed::TitleAndBody, doc);
  std::vector<double> out(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) out[i] = alpha * t[i] + (1.0 - alpha) * tb[i];
  return out;
}

// Leaf score = product of the mixed stage distributions along the leaf's path.
inline ScoreVector classify_hierarchical(const HierarchicalModel& m, const FeedTerms& doc,
                                         std::string recipe_id = {}) {
  std::map<std::pair<int, std::string>, std::map<std::string, double>> dist;
  for (const auto& node : m.nodes) {
    const auto d = node_distribution(m, node, doc);
    auto& slot = dist[{node.stage, node.parent}];
    for (std::size_t i = 0; i < node.children.size(); ++i) slot[node.children[i]] = d[i];
  }
  ScoreVector out{std::move(recipe_id), "hier", {}};
  for (const auto& leaf : m.leaves) {
    double p = 1.0;
    for (int k = 0; k < static_cast<int>(m.spec.stages.size()); ++k)
      p *= dist.at({k, m.spec.group(k - 1, leaf)}).at(m.spec.group(k, leaf));
    out.scores[leaf] = p;
  }
  return out;
}

}  // namespace deft
