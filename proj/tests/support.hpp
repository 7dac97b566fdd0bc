#pragma once

#include <filesystem>
#include <string>

#include "deft/corpus.hpp"

namespace testing_support {

inline std::string fixture(const std::string& name) { return std::string(DEFT_FIXTURES) + "/" + name; }

inline deft::Corpus six(deft::LabelKind kind = deft::LabelKind::DishType) {
  return deft::load_corpus(fixture("six_recipes.xml"), kind);
}

// Fresh per-test directory under the build tree.
inline std::string scratch(const std::string& name) {
  const auto dir = std::filesystem::path(DEFT_SCRATCH) / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace testing_support
