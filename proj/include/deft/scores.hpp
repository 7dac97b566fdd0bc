#pragma once

#include <map>
#include <string>
#include <vector>

#include "deft/common.hpp"

namespace deft {

// Per-class scores emitted by one method for one recipe. Keys iterate in
// bytewise order, which is also the tie-break order.
struct ScoreVector {
  std::string recipe_id;
  std::string method_id;
  std::map<std::string, double> scores;

  // First class (in key order) holding the maximum score.
  std::string argmax() const {
    std::string best;
    double best_score = 0.0;
    bool first = true;
    for (const auto& [c, s] : scores)
      if (first || s > best_score) {
        best = c;
        best_score = s;
        first = false;
      }
    return best;
  }

  std::vector<std::string> classes() const {
    std::vector<std::string> out;
    for (const auto& [c, s] : scores) out.push_back(c);
    return out;
  }

  bool operator==(const ScoreVector&) const = default;
};

inline ScoreVector make_score_vector(std::string recipe_id, std::string method_id,
                                     const std::vector<std::string>& classes,
                                     const std::vector<double>& values) {
  ScoreVector v{std::move(recipe_id), std::move(method_id), {}};
  for (std::size_t i = 0; i < classes.size(); ++i) v.scores[classes[i]] = values.at(i);
  return v;
}

// Index of the first maximum.
inline std::size_t argmax_index(const std::vector<double>& values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i)
    if (values[i] > values[best]) best = i;
  return best;
}

}  // namespace deft
