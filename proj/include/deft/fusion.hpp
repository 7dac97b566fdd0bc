#pragma once

// Late fusion of per-method class scores: sum-to-one normalization, linear
// combination, and ELECTRE-style outranking with concordance and veto.

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "deft/common.hpp"
#include "deft/scores.hpp"

namespace deft {

// Shifts by -min when any score is negative, then divides by the sum. A zero
// sum yields the uniform vector.
inline ScoreVector normalize_scores(const ScoreVector& v) {
  ScoreVector out{v.recipe_id, v.method_id, {}};
  if (v.scores.empty()) return out;
  double lo = v.scores.begin()->second;
  for (const auto& [c, s] : v.scores) lo = std::min(lo, s);
  const double shift = lo < 0.0 ? -lo : 0.0;
  double sum = 0.0;
  for (const auto& [c, s] : v.scores) sum += s + shift;
  for (const auto& [c, s] : v.scores)
    out.scores[c] = sum == 0.0 ? 1.0 / static_cast<double>(v.scores.size()) : (s + shift) / sum;
  return out;
}

inline void check_same_classes(const std::vector<ScoreVector>& vectors) {
  if (vectors.empty()) throw Error(ErrorCode::Data, "fusion", "nothing to fuse");
  const auto ref = vectors.front().classes();
  for (const auto& v : vectors)
    if (v.classes() != ref)
      throw Error(ErrorCode::Data, "fusion", "class-set mismatch between methods", v.recipe_id);
}

// Sum of normalized scores; the winner is the first maximum in class order.
inline std::pair<std::string, ScoreVector> fuse_linear(const std::vector<ScoreVector>& vectors) {
  check_same_classes(vectors);
  ScoreVector fused{vectors.front().recipe_id, "linear", {}};
  for (const auto& [c, s] : vectors.front().scores) fused.scores[c] = 0.0;
  for (const auto& v : vectors)
    for (const auto& [c, s] : v.scores) fused.scores[c] += s;
  return {fused.argmax(), fused};
}

struct ElectreParams {
  std::map<std::string, double> method_weights;  // p_i, default_weight when absent
  double concordance_threshold = 0.7;            // sc
  std::map<std::string, double> veto_values;     // v_i, default_veto when absent
  double default_weight = 1.0;
  double default_veto = 0.5;

  double weight(const std::string& method) const {
    auto it = method_weights.find(method);
    return it == method_weights.end() ? default_weight : it->second;
  }

  double veto(const std::string& method) const {
    auto it = veto_values.find(method);
    return it == veto_values.end() ? default_veto : it->second;
  }

  void validate() const {
    auto in_unit = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (!(default_weight > 0.0)) throw Error(ErrorCode::Config, "fusion", "method weights must be > 0");
    for (const auto& [m, w] : method_weights)
      if (!(w > 0.0)) throw Error(ErrorCode::Config, "fusion", "weight of '" + m + "' must be > 0");
    if (!in_unit(concordance_threshold))
      throw Error(ErrorCode::Config, "fusion", "concordance threshold must lie in [0,1]");
    if (!in_unit(default_veto)) throw Error(ErrorCode::Config, "fusion", "veto must lie in [0,1]");
    for (const auto& [m, v] : veto_values)
      if (!in_unit(v)) throw Error(ErrorCode::Config, "fusion", "veto of '" + m + "' must lie in [0,1]");
  }

  // Unit weights, veto 0.5 everywhere; sc = 0.7 for difficulty, 0.6 for dish type.
  static ElectreParams defaults_for_difficulty() { return {{}, 0.7, {}, 1.0, 0.5}; }
  static ElectreParams defaults_for_dish_type() { return {{}, 0.6, {}, 1.0, 0.5}; }

  // Line format: `sc <x>`, `weight <method> <x>`, `veto <method> <x>`,
  // `default_weight <x>`, `default_veto <x>`; '#' starts a comment line.
  static ElectreParams parse(const std::vector<std::string>& lines, ElectreParams base) {
    for (std::size_t i = 0; i < lines.size(); ++i) {
      const std::string line = trim(lines[i]);
      if (line.empty() || line[0] == '#') continue;
      std::vector<std::string> cols;
      for (auto& p : split(line, ' '))
        if (!p.empty()) cols.push_back(p);
      auto fail = [&] {
        return Error(ErrorCode::Config, "fusion", "bad fusion config line " + std::to_string(i + 1));
      };
      try {
        if (cols[0] == "sc" && cols.size() == 2) base.concordance_threshold = parse_double(cols[1]);
        else if (cols[0] == "weight" && cols.size() == 3) base.method_weights[cols[1]] = parse_double(cols[2]);
        else if (cols[0] == "veto" && cols.size() == 3) base.veto_values[cols[1]] = parse_double(cols[2]);
        else if (cols[0] == "default_weight" && cols.size() == 2) base.default_weight = parse_double(cols[1]);
        else if (cols[0] == "default_veto" && cols.size() == 2) base.default_veto = parse_double(cols[1]);
        else throw fail();
      } catch (const Error&) {
        throw fail();
      }
    }
    base.validate();
    return base;
  }
};

struct OutrankingRelation {
  std::vector<std::string> classes;
  std::set<std::pair<std::string, std::string>> edges;  // (c, c') means c outranks c'
  std::map<std::pair<std::string, std::string>, double> concordance;
  std::set<std::pair<std::string, std::string>> vetoed;
  std::vector<std::string> kernel;  // classes outranked by nobody, in class order

  bool outranks(const std::string& a, const std::string& b) const { return edges.count({a, b}) > 0; }
};

inline OutrankingRelation electre_relation(const std::vector<ScoreVector>& vectors,
                                           const ElectreParams& params) {
  check_same_classes(vectors);
  params.validate();
  OutrankingRelation rel;
  rel.classes = vectors.front().classes();
  double total_weight = 0.0;
  for (const auto& v : vectors) total_weight += params.weight(v.method_id);

  for (const auto& c : rel.classes)
    for (const auto& d : rel.classes) {
      if (c == d) continue;
      double agree = 0.0;
      bool veto = false;
      for (const auto& v : vectors) {
        const double sc = v.scores.at(c), sd = v.scores.at(d);
        if (sc >= sd) agree += params.weight(v.method_id);
        if (sd > sc && sd - sc >= params.veto(v.method_id)) veto = true;
      }
      const double conc = agree / total_weight;
      rel.concordance[{c, d}] = conc;
      if (veto) rel.vetoed.insert({c, d});
      if (conc >= params.concordance_threshold && !veto) rel.edges.insert({c, d});
    }
  for (const auto& d : rel.classes) {
    bool beaten = false;
    for (const auto& c : rel.classes)
      if (c != d && rel.outranks(c, d)) beaten = true;
    if (!beaten) rel.kernel.push_back(d);
  }
  return rel;
}

// A singleton kernel decides; otherwise the linear-combination winner.
inline std::pair<std::string, OutrankingRelation> fuse_electre(const std::vector<ScoreVector>& vectors,
                                                               const ElectreParams& params) {
  auto rel = electre_relation(vectors, params);
  if (rel.kernel.size() == 1) return {rel.kernel.front(), std::move(rel)};
  return {fuse_linear(vectors).first, std::move(rel)};
}

}  // namespace deft
