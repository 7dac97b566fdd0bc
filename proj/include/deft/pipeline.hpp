#pragma once

// The commands behind the `deft` executable: train, classify, fuse, extract,
// evaluate, sweep. Everything here is file plumbing around the modules.

#include <openssl/evp.h>

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "deft/boost.hpp"
#include "deft/common.hpp"
#include "deft/corpus.hpp"
#include "deft/cosine.hpp"
#include "deft/eval.hpp"
#include "deft/extraction.hpp"
#include "deft/features.hpp"
#include "deft/fusion.hpp"
#include "deft/svm.hpp"
#include "deft/textnorm.hpp"

namespace deft::pipeline {

namespace fs = std::filesystem;
using nlohmann::json;

enum class Task { T1, T2, T4 };

inline Task parse_task(const std::string& s) {
  if (s == "T1") return Task::T1;
  if (s == "T2") return Task::T2;
  if (s == "T4") return Task::T4;
  throw Error(ErrorCode::Config, "cli", "unknown task '" + s + "' (expected T1, T2 or T4)");
}

inline std::string to_string(Task t) { return t == Task::T1 ? "T1" : t == Task::T2 ? "T2" : "T4"; }

inline LabelKind label_kind(Task t) {
  return t == Task::T1 ? LabelKind::Difficulty : t == Task::T2 ? LabelKind::DishType : LabelKind::None;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw Error(ErrorCode::Data, "cli", "sha256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

struct Paths {
  std::string train, test, abbreviations, hierarchy, fusion, df_boost;
  std::string models = "models";
  std::string runs = "runs";
};

struct PipelineConfig {
  Task task = Task::T1;
  std::uint64_t seed = 1;
  Paths paths;
  Fraction dev_fraction{3863, 13684};
  NormConfig norm;
  BoostConfig boost;
  SvmConfig svm;
  long long svm_mi_k = -1;  // -1 task default (T2: 10000), 0 no filter
  double gini_threshold = 0.45;
  DenominatorMode cosine_mode = DenominatorMode::Standard;
  double hierarchy_alpha = 0.5;

  std::optional<std::size_t> mi_k() const {
    const long long k = svm_mi_k < 0 ? (task == Task::T2 ? 10000 : 0) : svm_mi_k;
    if (k == 0) return std::nullopt;
    return static_cast<std::size_t>(k);
  }

  // Methods fed to fusion, in run order.
  std::vector<std::string> methods() const {
    if (task == Task::T1) return {"hier", "boost", "svm"};
    return {"hier", "boost", "svm", "cosine"};
  }

  HierarchySpec hierarchy() const {
    if (!paths.hierarchy.empty()) return HierarchySpec::parse(read_lines(paths.hierarchy, "cli"));
    return task == Task::T1 ? HierarchySpec::difficulty(hierarchy_alpha)
                            : HierarchySpec::dish_type(hierarchy_alpha);
  }

  ElectreParams electre() const {
    ElectreParams base =
        task == Task::T1 ? ElectreParams::defaults_for_difficulty() : ElectreParams::defaults_for_dish_type();
    if (paths.fusion.empty()) return base;
    return ElectreParams::parse(read_lines(paths.fusion, "cli"), base);
  }

  DfBoost df_boost() const {
    if (paths.df_boost.empty()) return {};
    return parse_df_boost(read_lines(paths.df_boost, "cli"));
  }

  // Settings that change the token stream; stored in the manifest and
  // compared before any model is used.
  json norm_fingerprint() const {
    std::string table;
    for (const auto& [k, v] : norm.abbrev_table) table += k + "\t" + v + "\n";
    return {{"number_conversion", norm.number_conversion},
            {"agglutinate", norm.agglutinate},
            {"agglutination_min_count", norm.agglutination_min_count},
            {"agglutination_max_n", norm.agglutination_max_n},
            {"abbreviations_sha256", sha256_hex(table)}};
  }

  // Checks referenced files and loads the abbreviation table.
  void resolve() {
    auto need = [](const std::string& p, const char* what) {
      if (!p.empty() && !fs::exists(p))
        throw Error(ErrorCode::Config, "cli", std::string(what) + " not found: " + p);
    };
    need(paths.abbreviations, "abbreviation file");
    need(paths.hierarchy, "hierarchy spec");
    need(paths.fusion, "fusion config");
    need(paths.df_boost, "df boost file");
    if (!paths.abbreviations.empty()) norm.abbrev_table = load_abbreviations(paths.abbreviations);
    norm.validate();
    boost.validate();
    svm.validate();
    if (!(gini_threshold >= 0.0 && gini_threshold <= 1.0))
      throw Error(ErrorCode::Config, "cli", "gini threshold must lie in [0,1]");
    if (dev_fraction.den == 0 || dev_fraction.num == 0 || dev_fraction.num >= dev_fraction.den)
      throw Error(ErrorCode::Config, "cli", "dev_fraction must lie strictly between 0 and 1");
  }
};

// Reads a JSON config; relative paths are taken relative to the file.
inline PipelineConfig load_config(const std::string& path) {
  PipelineConfig cfg;
  json j;
  try {
    j = json::parse(read_file(path, "cli"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, "cli", "cannot parse config " + path + ": " + e.what());
  }
  const fs::path base = fs::path(path).parent_path();
  auto rel = [&](const std::string& p) { return p.empty() || fs::path(p).is_absolute() ? p : (base / p).string(); };
  try {
    if (j.contains("task")) cfg.task = parse_task(j["task"].get<std::string>());
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("dev_fraction")) {
      const auto& d = j["dev_fraction"];
      cfg.dev_fraction = Fraction::parse(d.is_string() ? d.get<std::string>() : d.dump());
    }
    if (j.contains("paths")) {
      const auto& p = j["paths"];
      for (auto [key, field] : {std::pair{"train", &cfg.paths.train}, {"test", &cfg.paths.test},
                                {"abbreviations", &cfg.paths.abbreviations}, {"hierarchy", &cfg.paths.hierarchy},
                                {"fusion", &cfg.paths.fusion}, {"df_boost", &cfg.paths.df_boost},
                                {"models", &cfg.paths.models}, {"runs", &cfg.paths.runs}})
        if (p.contains(key)) *field = rel(p[key].get<std::string>());
    }
    if (j.contains("textnorm")) {
      const auto& t = j["textnorm"];
      cfg.norm.number_conversion = t.value("number_conversion", cfg.norm.number_conversion);
      cfg.norm.agglutinate = t.value("agglutinate", cfg.norm.agglutinate);
      cfg.norm.agglutination_min_count = t.value("agglutination_min_count", cfg.norm.agglutination_min_count);
      cfg.norm.agglutination_max_n = t.value("agglutination_max_n", cfg.norm.agglutination_max_n);
    }
    if (j.contains("boost")) {
      const auto& b = j["boost"];
      cfg.boost.max_rounds = b.value("max_rounds", cfg.boost.max_rounds);
      cfg.boost.smoothing_epsilon = b.value("smoothing_epsilon", cfg.boost.smoothing_epsilon);
      cfg.boost.dev_patience = b.value("dev_patience", cfg.boost.dev_patience);
    }
    if (j.contains("svm")) {
      const auto& s = j["svm"];
      cfg.svm.lambda = s.value("lambda", cfg.svm.lambda);
      cfg.svm.epochs = s.value("epochs", cfg.svm.epochs);
      cfg.svm_mi_k = s.value("mi_k", cfg.svm_mi_k);
    }
    if (j.contains("cosine")) {
      const auto& c = j["cosine"];
      cfg.gini_threshold = c.value("gini_threshold", cfg.gini_threshold);
      if (c.contains("denominator")) cfg.cosine_mode = parse_denominator_mode(c["denominator"].get<std::string>());
      cfg.hierarchy_alpha = c.value("alpha", cfg.hierarchy_alpha);
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Config, "cli", "bad config " + path + ": " + e.what());
  }
  cfg.svm.seed = cfg.seed;
  return cfg;
}

// ---------------------------------------------------------------------------
// Model directory.

inline const char* kManifest = "manifest.json";

inline std::string path_in(const std::string& dir, const std::string& name) { return (fs::path(dir) / name).string(); }

inline std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out = split(text, '\n');
  if (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

// Cosine bundle: optional flat model, then the hierarchy.
inline std::string serialize_cosine_bundle(const std::optional<CosineModel>& flat, const HierarchicalModel& hier) {
  const std::string f = flat ? flat->serialize() : std::string();
  const std::string h = hier.serialize();
  return "deft-cosine-bundle\t1\nflat\t" + std::to_string(lines_of(f).size()) + "\n" + f + "hier\t" +
         std::to_string(lines_of(h).size()) + "\n" + h;
}

inline std::pair<std::optional<CosineModel>, HierarchicalModel> parse_cosine_bundle(
    const std::vector<std::string>& lines) {
  auto bad = [] { return Error(ErrorCode::ModelMismatch, "classify_cosine", "bad cosine bundle"); };
  if (lines.size() < 2 || lines[0] != "deft-cosine-bundle\t1") throw bad();
  std::size_t at = 1;
  auto section = [&](const char* name) {
    if (at >= lines.size()) throw bad();
    auto h = split(lines[at++], '\t');
    if (h.size() != 2 || h[0] != name) throw bad();
    const auto n = static_cast<std::size_t>(parse_int(h[1], "classify_cosine"));
    if (at + n > lines.size()) throw bad();
    std::vector<std::string> body(lines.begin() + at, lines.begin() + at + n);
    at += n;
    return body;
  };
  auto flat_lines = section("flat");
  auto hier_lines = section("hier");
  std::optional<CosineModel> flat;
  if (!flat_lines.empty()) flat = CosineModel::parse(flat_lines);
  return {std::move(flat), HierarchicalModel::parse(hier_lines)};
}

// Item names used as the boosting ingredient field: the recipe's own list
// when it has one, the lexicon extraction otherwise.
inline std::vector<std::string> boost_ingredients(const Recipe& r, const NormConfig& norm,
                                                  const IngredientLexicon* lex) {
  std::vector<std::string> out;
  if (r.gold_ingredients) {
    for (const auto& g : *r.gold_ingredients)
      if (auto f = ingredient_form(g, norm); !f.empty()) out.push_back(f);
  } else if (lex) {
    out = ingredient_names(extract_ingredients(r, *lex, norm));
  }
  return out;
}

inline bool has_gold_ingredients(const Corpus& c) {
  return std::any_of(c.recipes.begin(), c.recipes.end(), [](const Recipe& r) { return r.gold_ingredients.has_value(); });
}

inline Corpus load_input(const std::string& path, LabelKind kind, const char* what) {
  if (path.empty()) throw Error(ErrorCode::Config, "cli", std::string("no ") + what + " corpus configured");
  if (!fs::exists(path)) throw Error(ErrorCode::Config, "cli", std::string(what) + " corpus not found: " + path);
  Corpus c = load_corpus(path, kind);
  validate_corpus(c);
  return c;
}

inline void cmd_train(const PipelineConfig& cfg, std::ostream& log) {
  const Corpus train = load_input(cfg.paths.train, label_kind(cfg.task), "training");
  fs::create_directories(cfg.paths.models);
  std::map<std::string, std::string> files;
  json manifest;
  manifest["format"] = "deft-manifest 1";
  manifest["task"] = to_string(cfg.task);
  manifest["seed"] = cfg.seed;
  manifest["norm"] = cfg.norm_fingerprint();

  const AgglutinationModel agg = cfg.norm.agglutinate ? fit_agglutinator(train, cfg.norm) : AgglutinationModel{};
  files["agglutination.txt"] = agg.serialize();
  const Normalizer norm(cfg.norm, agg);

  std::optional<IngredientLexicon> lex;
  if (cfg.task == Task::T4 || has_gold_ingredients(train)) {
    lex = build_lexicon(train, cfg.norm);
    files["lexicon.tsv"] = lex->serialize();
  }

  if (cfg.task != Task::T4) {
    const auto labels = train.labels();
    const auto dev_mask = stratified_dev_mask(labels, {cfg.dev_fraction, cfg.seed});
    std::string split_tsv;
    std::size_t n_dev = 0;
    for (std::size_t i = 0; i < train.size(); ++i) {
      split_tsv += train.recipes[i].id + "\t" + (dev_mask[i] ? "dev" : "train") + "\n";
      n_dev += dev_mask[i];
    }
    files["split.tsv"] = split_tsv;
    manifest["dev_fraction"] = std::to_string(cfg.dev_fraction.num) + "/" + std::to_string(cfg.dev_fraction.den);
    manifest["split"] = {{"train", train.size() - n_dev}, {"dev", n_dev}};

    const auto docs = corpus_terms(train, norm);
    auto stats = std::make_shared<LexiconStats>(build_stats(docs, labels, docs));
    files["stats.tsv"] = stats->to_tsv();

    // Boosting: pick the round count on the dev part, then refit on everything.
    std::vector<BoostInstance> inst;
    for (const auto& r : train.recipes)
      inst.push_back(make_boost_instance(r, boost_ingredients(r, cfg.norm, lex ? &*lex : nullptr), norm));
    std::vector<BoostInstance> fit_x, dev_x;
    std::vector<std::string> fit_y, dev_y;
    for (std::size_t i = 0; i < inst.size(); ++i) {
      (dev_mask[i] ? dev_x : fit_x).push_back(inst[i]);
      (dev_mask[i] ? dev_y : fit_y).push_back(labels[i]);
    }
    BoostTrace trace;
    train_boost(fit_x, fit_y, dev_x, dev_y, cfg.boost, &trace);
    BoostConfig final_cfg = cfg.boost;
    final_cfg.max_rounds = static_cast<int>(trace.chosen_rounds);
    const BoostModel boost = train_boost(inst, labels, {}, {}, final_cfg);
    files["boost.model"] = boost.serialize();
    manifest["boost_rounds"] = boost.rounds.size();
    log << "boost: " << boost.rounds.size() << " rounds (dev-selected " << trace.chosen_rounds << ")\n";

    std::vector<SparseVector> tfidf;
    for (const auto& d : docs) tfidf.push_back(tfidf_vector(d, *stats));
    std::optional<std::set<std::string>> filter;
    if (auto k = cfg.mi_k()) filter = mutual_information_select(*stats, *k);
    SvmConfig svm_cfg = cfg.svm;
    svm_cfg.seed = cfg.seed;
    files["svm.model"] = train_ovo(tfidf, labels, svm_cfg, std::move(filter)).serialize();

    std::optional<CosineModel> flat;
    if (cfg.task == Task::T2) flat = train_cosine(stats, cfg.gini_threshold, cfg.cosine_mode, cfg.df_boost());
    std::vector<FeedTerms> feeds;
    for (const auto& r : train.recipes) feeds.push_back(feed_terms(r, norm));
    const auto hier =
        train_hierarchical(feeds, labels, feeds, cfg.hierarchy(), cfg.gini_threshold, cfg.cosine_mode);
    files["cosine.model"] = serialize_cosine_bundle(flat, hier);
    manifest["classifiers"] = {"boost.model", "cosine.model", "svm.model"};
  }

  json digests = json::object();
  for (const auto& [name, content] : files) {
    write_file(path_in(cfg.paths.models, name), content, "cli");
    digests[name] = sha256_hex(content);
  }
  manifest["files"] = digests;
  write_file(path_in(cfg.paths.models, kManifest), manifest.dump(2) + "\n", "cli");
  log << "train: " << files.size() << " files written to " << cfg.paths.models << "\n";
}

// Loaded, digest-checked model directory.
struct ModelSet {
  json manifest;
  Normalizer norm;
  std::optional<IngredientLexicon> lexicon;
  std::optional<LexiconStats> stats;
  std::optional<BoostModel> boost;
  std::optional<OvoModel> svm;
  std::optional<CosineModel> flat_cosine;
  std::optional<HierarchicalModel> hier;
};

inline ModelSet load_models(const PipelineConfig& cfg) {
  const std::string mpath = path_in(cfg.paths.models, kManifest);
  if (!fs::exists(mpath)) throw Error(ErrorCode::Config, "cli", "no trained models in " + cfg.paths.models);
  ModelSet ms;
  try {
    ms.manifest = json::parse(read_file(mpath, "cli"));
  } catch (const json::exception&) {
    throw Error(ErrorCode::ModelMismatch, "cli", "unreadable manifest " + mpath);
  }
  auto mismatch = [](const std::string& why) { return Error(ErrorCode::ModelMismatch, "cli", why); };
  if (ms.manifest.value("format", "") != "deft-manifest 1") throw mismatch("unknown manifest version");
  if (ms.manifest.value("task", "") != to_string(cfg.task))
    throw mismatch("models were trained for task " + ms.manifest.value("task", std::string("?")));
  if (ms.manifest["norm"] != cfg.norm_fingerprint())
    throw mismatch("normalization settings differ from the ones used at training");

  std::map<std::string, std::vector<std::string>> content;
  for (const auto& [name, digest] : ms.manifest["files"].items()) {
    const std::string text = read_file(path_in(cfg.paths.models, name), "cli");
    if (sha256_hex(text) != digest.get<std::string>()) throw mismatch("digest mismatch for " + name);
    content[name] = lines_of(text);
  }
  ms.norm = Normalizer(cfg.norm, AgglutinationModel::parse(content.at("agglutination.txt")));
  if (content.count("lexicon.tsv")) ms.lexicon = IngredientLexicon::parse(content["lexicon.tsv"]);
  if (content.count("stats.tsv")) ms.stats = LexiconStats::from_tsv(content["stats.tsv"]);
  if (content.count("boost.model")) ms.boost = BoostModel::parse(content["boost.model"]);
  if (content.count("svm.model")) ms.svm = OvoModel::parse(content["svm.model"]);
  if (content.count("cosine.model")) {
    auto [flat, hier] = parse_cosine_bundle(content["cosine.model"]);
    ms.flat_cosine = std::move(flat);
    ms.hier = std::move(hier);
  }
  if (ms.stats && ms.svm && ms.svm->classes != ms.stats->classes)
    throw mismatch("svm model classes differ from the lexicon statistics");
  return ms;
}

// Wide score table: header `recipe_id<TAB>class...`, full precision.
inline std::string format_score_table(const std::vector<ScoreVector>& rows) {
  if (rows.empty()) return "recipe_id\n";
  std::string out = "recipe_id";
  for (const auto& c : rows.front().classes()) out += "\t" + c;
  out += "\n";
  for (const auto& v : rows) {
    out += v.recipe_id;
    for (const auto& [c, s] : v.scores) out += "\t" + format_exact(s);
    out += "\n";
  }
  return out;
}

inline std::vector<ScoreVector> parse_score_table(const std::vector<std::string>& lines, const std::string& method) {
  if (lines.empty()) throw Error(ErrorCode::Data, "fusion", "empty score table for " + method);
  const auto head = split(lines[0], '\t');
  std::vector<ScoreVector> out;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    auto cols = split(lines[i], '\t');
    if (cols.size() != head.size())
      throw Error(ErrorCode::Data, "fusion", "bad score line " + std::to_string(i + 1) + " for " + method);
    ScoreVector v{cols[0], method, {}};
    for (std::size_t c = 1; c < cols.size(); ++c) v.scores[head[c]] = parse_double(cols[c], "fusion");
    out.push_back(std::move(v));
  }
  return out;
}

inline std::string score_file(const PipelineConfig& cfg, const std::string& method) {
  return path_in(cfg.paths.runs, "scores." + method + ".tsv");
}

inline void cmd_classify(const PipelineConfig& cfg, std::ostream& log) {
  if (cfg.task == Task::T4) throw Error(ErrorCode::Config, "cli", "classify needs task T1 or T2");
  const ModelSet ms = load_models(cfg);
  const Corpus test = load_input(cfg.paths.test, LabelKind::None, "test");
  if (!ms.boost || !ms.svm || !ms.hier || !ms.stats)
    throw Error(ErrorCode::ModelMismatch, "cli", "model directory lacks a classifier");
  std::map<std::string, std::vector<ScoreVector>> out;
  for (const auto& r : test.recipes) {
    const TermCounts terms = recipe_terms(r, ms.norm);
    const auto lex = ms.lexicon ? &*ms.lexicon : nullptr;
    out["boost"].push_back(
        score_boost(*ms.boost, make_boost_instance(r, boost_ingredients(r, cfg.norm, lex), ms.norm), r.id));
    out["svm"].push_back(score_ovo(*ms.svm, tfidf_vector(terms, *ms.stats), r.id));
    out["hier"].push_back(classify_hierarchical(*ms.hier, feed_terms(r, ms.norm), r.id));
    if (ms.flat_cosine) out["cosine"].push_back(score_cosine(*ms.flat_cosine, terms, r.id));
  }
  fs::create_directories(cfg.paths.runs);
  for (const auto& [method, rows] : out) {
    write_file(score_file(cfg, method), format_score_table(rows), "cli");
    log << "classify: " << method << " scores for " << rows.size() << " recipes\n";
  }
}

// One fused run. `electre` false means linear combination; a single method
// is its own argmax.
struct RunSpec {
  std::string name;
  std::vector<std::string> methods;
  bool electre = false;
};

inline std::vector<RunSpec> paper_runs(Task task) {
  if (task == Task::T1)
    return {{"run1", {"svm"}, false}, {"run2", {"hier", "boost", "svm"}, true}, {"run3", {"hier", "boost", "svm"}, false}};
  return {{"run1", {"hier"}, false},
          {"run2", {"hier", "boost", "svm", "cosine"}, true},
          {"run3", {"hier", "boost", "svm", "cosine"}, false}};
}

// Writes `<name>.tsv` (recipe_id, class) and `<name>.detail.tsv`.
inline void fuse_run(const PipelineConfig& cfg, const RunSpec& run, const ElectreParams& params, std::ostream& log) {
  std::vector<std::vector<ScoreVector>> tables;
  for (const auto& m : run.methods) {
    const std::string path = score_file(cfg, m);
    if (!fs::exists(path)) throw Error(ErrorCode::Config, "cli", "missing score file " + path + " (run classify first)");
    tables.push_back(parse_score_table(read_lines(path, "fusion"), m));
  }
  const std::size_t n = tables.front().size();
  for (const auto& t : tables)
    if (t.size() != n) throw Error(ErrorCode::Data, "fusion", "score files cover different recipes");

  std::string labels, detail = "recipe_id";
  for (const auto& m : run.methods)
    for (const auto& [c, s] : tables.front().empty() ? std::map<std::string, double>{} : tables.front()[0].scores)
      detail += "\t" + m + ":" + c;
  detail += "\tkernel\tfinal\n";
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<ScoreVector> vs;
    for (const auto& t : tables) {
      if (t[i].recipe_id != tables.front()[i].recipe_id)
        throw Error(ErrorCode::Data, "fusion", "score files are not aligned", t[i].recipe_id);
      vs.push_back(normalize_scores(t[i]));
    }
    std::string final_class, kernel = "-";
    if (run.methods.size() == 1) {
      final_class = vs.front().argmax();
    } else if (run.electre) {
      auto [winner, rel] = fuse_electre(vs, params);
      final_class = winner;
      kernel = join(rel.kernel, ",");
    } else {
      final_class = fuse_linear(vs).first;
    }
    const std::string& id = vs.front().recipe_id;
    labels += id + "\t" + final_class + "\n";
    detail += id;
    for (const auto& v : vs)
      for (const auto& [c, s] : v.scores) detail += "\t" + format_fixed(s);
    detail += "\t" + kernel + "\t" + final_class + "\n";
  }
  fs::create_directories(cfg.paths.runs);
  write_file(path_in(cfg.paths.runs, run.name + ".tsv"), labels, "cli");
  write_file(path_in(cfg.paths.runs, run.name + ".detail.tsv"), detail, "cli");
  log << "fuse: " << run.name << " (" << join(run.methods, "+") << (run.electre ? ", electre" : "") << ")\n";
}

inline void cmd_fuse(const PipelineConfig& cfg, const std::vector<RunSpec>& runs, std::ostream& log) {
  if (cfg.task == Task::T4) throw Error(ErrorCode::Config, "cli", "fuse needs task T1 or T2");
  const ElectreParams params = cfg.electre();
  for (const auto& r : runs) {
    if (r.methods.empty()) throw Error(ErrorCode::Config, "cli", "run " + r.name + " has no method");
    fuse_run(cfg, r, params, log);
  }
}

inline std::string extraction_run_file(const PipelineConfig& cfg) { return path_in(cfg.paths.runs, "t4.tsv"); }

inline void cmd_extract(const PipelineConfig& cfg, std::ostream& log) {
  const ModelSet ms = load_models(cfg);
  if (!ms.lexicon) throw Error(ErrorCode::ModelMismatch, "cli", "model directory has no ingredient lexicon");
  const Corpus test = load_input(cfg.paths.test, LabelKind::None, "test");
  std::vector<std::pair<std::string, CandidateList>> runs;
  for (const auto& r : test.recipes) runs.emplace_back(r.id, extract_ingredients(r, *ms.lexicon, cfg.norm));
  fs::create_directories(cfg.paths.runs);
  write_file(extraction_run_file(cfg), format_extraction_run(runs), "cli");
  log << "extract: " << runs.size() << " recipes\n";
}

struct EvalReport {
  std::string text;
  std::string tsv;
};

// Classification runs are scored against the gold corpus labels; the T4
// run against `qrels` (or the corpus gold lists when empty).
inline EvalReport cmd_evaluate(const PipelineConfig& cfg, const std::string& run_path, const std::string& gold_path,
                               const std::string& qrels_path, bool fold_accents) {
  if (!fs::exists(run_path)) throw Error(ErrorCode::Config, "cli", "run file not found: " + run_path);
  const auto run_lines = read_lines(run_path, "eval");
  if (cfg.task == Task::T4) {
    QrelSet q;
    if (!qrels_path.empty()) {
      if (!fs::exists(qrels_path)) throw Error(ErrorCode::Config, "cli", "qrels file not found: " + qrels_path);
      q = parse_qrels(read_lines(qrels_path, "eval"));
    } else {
      q = parse_qrels(lines_of(format_qrels(load_input(gold_path, LabelKind::None, "gold"))));
    }
    const auto res = mean_average_precision(parse_ranked_run(run_lines), q,
                                            fold_accents ? MatchMode::AccentFolding : MatchMode::AccentPreserving);
    EvalReport rep;
    rep.text = "recipes " + std::to_string(res.ap.size()) + "\nskipped (empty gold) " +
               std::to_string(res.skipped_empty) + "\nMAP " + format_fixed(res.map) + "\n";
    rep.tsv = "recipe_id\tap\n";
    for (const auto& [id, ap] : res.ap) rep.tsv += id + "\t" + format_fixed(ap) + "\n";
    rep.tsv += "all\t" + format_fixed(res.map) + "\n";
    return rep;
  }
  const Corpus gold = load_input(gold_path, label_kind(cfg.task), "gold");
  const auto r = classification_report(gold, parse_label_run(run_lines), cfg.task == Task::T1);
  return {r.to_text(), r.to_tsv()};
}

// Inclusive grid from..to with `step`, computed by index to avoid drift.
inline std::vector<double> grid(double from, double to, double step) {
  if (!(step > 0.0) || to < from) throw Error(ErrorCode::Config, "cli", "bad sweep grid");
  std::vector<double> out;
  const auto n = static_cast<long long>(std::floor((to - from) / step + 1e-9));
  for (long long i = 0; i <= n; ++i) out.push_back(from + static_cast<double>(i) * step);
  return out;
}

// Flat cosine on the training part of the split, scored on the dev part.
inline std::string sweep_gini(const PipelineConfig& cfg, const std::vector<double>& thresholds) {
  if (cfg.task == Task::T4) throw Error(ErrorCode::Config, "cli", "sweep needs task T1 or T2");
  const Corpus train = load_input(cfg.paths.train, label_kind(cfg.task), "training");
  const AgglutinationModel agg = cfg.norm.agglutinate ? fit_agglutinator(train, cfg.norm) : AgglutinationModel{};
  const Normalizer norm(cfg.norm, agg);
  const auto [fit, dev] = stratified_split(train, {cfg.dev_fraction, cfg.seed});
  const auto all_docs = corpus_terms(train, norm);
  const auto fit_docs = corpus_terms(fit, norm);
  auto stats = std::make_shared<LexiconStats>(build_stats(fit_docs, fit.labels(), all_docs));
  std::string out = "threshold\tsupport\tmicro_f\tmacro_f\n";
  for (double th : thresholds) {
    const CosineModel m = train_cosine(stats, th, cfg.cosine_mode, cfg.df_boost());
    std::map<std::string, std::string> pred;
    for (const auto& r : dev.recipes) pred[r.id] = score_cosine(m, recipe_terms(r, norm), r.id).argmax();
    std::size_t support = 0;
    for (const auto& [t, s] : stats->terms)
      if (s.df_train > 0 && LexiconStats::gini_of(s) >= th) ++support;
    const auto rep = classification_report(dev, pred, false);
    out += format_fixed(th) + "\t" + std::to_string(support) + "\t" + format_fixed(rep.micro_f) + "\t" +
           format_fixed(rep.macro_f) + "\n";
  }
  return out;
}

// ELECTRE grid over sc and a common veto, on the classify score files.
inline std::string sweep_electre(const PipelineConfig& cfg, const std::string& gold_path,
                                 const std::vector<double>& sc_values, const std::vector<double>& veto_values) {
  if (cfg.task == Task::T4) throw Error(ErrorCode::Config, "cli", "sweep needs task T1 or T2");
  const Corpus gold = load_input(gold_path, label_kind(cfg.task), "gold");
  const auto methods = cfg.methods();
  std::vector<std::vector<ScoreVector>> tables;
  for (const auto& m : methods) {
    const std::string path = score_file(cfg, m);
    if (!fs::exists(path)) throw Error(ErrorCode::Config, "cli", "missing score file " + path);
    tables.push_back(parse_score_table(read_lines(path, "fusion"), m));
  }
  const ElectreParams base = cfg.electre();
  std::string out = "sc\tveto\tmicro_f\tmacro_f\n";
  for (double sc : sc_values)
    for (double v : veto_values) {
      ElectreParams p = base;
      p.concordance_threshold = sc;
      p.default_veto = v;
      p.veto_values.clear();
      std::map<std::string, std::string> pred;
      for (std::size_t i = 0; i < tables.front().size(); ++i) {
        std::vector<ScoreVector> vs;
        for (const auto& t : tables) vs.push_back(normalize_scores(t.at(i)));
        pred[vs.front().recipe_id] = fuse_electre(vs, p).first;
      }
      const auto rep = classification_report(gold, pred, false);
      out += format_fixed(sc) + "\t" + format_fixed(v) + "\t" + format_fixed(rep.micro_f) + "\t" +
             format_fixed(rep.macro_f) + "\n";
    }
  return out;
}

}  // namespace deft::pipeline
