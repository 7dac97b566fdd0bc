// deft: train, classify, fuse, extract, evaluate, sweep.

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "deft/pipeline.hpp"

namespace {

using namespace deft;
using namespace deft::pipeline;

// Flag values; unset ones leave the config file untouched.
struct Overrides {
  std::string config;
  std::optional<std::string> task, train, test, models, runs, abbreviations, hierarchy, fusion, df_boost;
  std::optional<std::string> dev_fraction, denominator;
  std::optional<std::uint64_t> seed;
  std::optional<int> max_rounds, epochs;
  std::optional<long long> mi_k;
  std::optional<double> gini, lambda, alpha;
  std::optional<bool> agglutinate;

  void attach(CLI::App* app) {
    app->add_option("-c,--config", config, "JSON config file");
    app->add_option("--task", task, "T1 (difficulty), T2 (dish type) or T4 (ingredients)");
    app->add_option("--seed", seed, "split and SVM seed");
    app->add_option("--train", train, "training corpus XML");
    app->add_option("--test", test, "test corpus XML");
    app->add_option("--models", models, "model directory");
    app->add_option("--runs-dir", runs, "score and run output directory");
    app->add_option("--abbreviations", abbreviations, "abbreviation TSV");
    app->add_option("--hierarchy", hierarchy, "hierarchy spec file");
    app->add_option("--fusion-config", fusion, "ELECTRE parameter file");
    app->add_option("--df-boost", df_boost, "cosine df boost TSV");
    app->add_option("--dev-fraction", dev_fraction, "dev share of each class, a/b or decimal");
    app->add_option("--gini-threshold", gini, "Gini threshold of the cosine classifiers");
    app->add_option("--denominator", denominator, "cosine denominator: standard or literal");
    app->add_option("--alpha", alpha, "title-feed weight of the hierarchical classifier");
    app->add_option("--max-rounds", max_rounds, "boosting round cap");
    app->add_option("--svm-lambda", lambda, "SVM regularization");
    app->add_option("--svm-epochs", epochs, "SVM epochs");
    app->add_option("--mi-k", mi_k, "SVM vocabulary size by mutual information, 0 = all");
    app->add_option("--agglutinate", agglutinate, "merge frequent n-grams (true/false)");
  }

  PipelineConfig build() const {
    PipelineConfig cfg = config.empty() ? PipelineConfig{} : load_config(config);
    if (task) cfg.task = parse_task(*task);
    if (seed) cfg.seed = *seed;
    for (auto [flag, field] : {std::pair{&train, &cfg.paths.train}, {&test, &cfg.paths.test},
                               {&models, &cfg.paths.models}, {&runs, &cfg.paths.runs},
                               {&abbreviations, &cfg.paths.abbreviations}, {&hierarchy, &cfg.paths.hierarchy},
                               {&fusion, &cfg.paths.fusion}, {&df_boost, &cfg.paths.df_boost}})
      if (*flag) *field = **flag;
    if (dev_fraction) cfg.dev_fraction = Fraction::parse(*dev_fraction);
    if (denominator) cfg.cosine_mode = parse_denominator_mode(*denominator);
    if (gini) cfg.gini_threshold = *gini;
    if (alpha) cfg.hierarchy_alpha = *alpha;
    if (max_rounds) cfg.boost.max_rounds = *max_rounds;
    if (lambda) cfg.svm.lambda = *lambda;
    if (epochs) cfg.svm.epochs = *epochs;
    if (mi_k) cfg.svm_mi_k = *mi_k;
    if (agglutinate) cfg.norm.agglutinate = *agglutinate;
    cfg.svm.seed = cfg.seed;
    cfg.resolve();
    return cfg;
  }
};

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) std::cout << text;
  else write_file(path, text, "cli");
}

std::vector<double> parse_grid(const std::string& spec) {
  auto p = split(spec, ':');
  if (p.size() == 1) return {parse_double(p[0], "cli")};
  if (p.size() != 3) throw Error(ErrorCode::Config, "cli", "grid must be from:to:step");
  return grid(parse_double(p[0], "cli"), parse_double(p[1], "cli"), parse_double(p[2], "cli"));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DEFT recipe classification and ingredient extraction"};
  app.require_subcommand(1);

  Overrides ov_train, ov_classify, ov_fuse, ov_extract, ov_eval, ov_sweep;
  auto* train = app.add_subcommand("train", "fit every model of the task and write the manifest");
  ov_train.attach(train);

  auto* classify = app.add_subcommand("classify", "write per-method score tables for the test corpus");
  ov_classify.attach(classify);

  auto* fuse = app.add_subcommand("fuse", "combine score tables into final-label runs");
  ov_fuse.attach(fuse);
  std::string runs_preset, fuse_mode = "linear", fuse_methods, run_name = "fused";
  fuse->add_option("--runs", runs_preset, "'paper' writes run1, run2 and run3");
  fuse->add_option("--mode", fuse_mode, "linear or electre")->check(CLI::IsMember({"linear", "electre"}));
  fuse->add_option("--methods", fuse_methods, "comma-separated method ids (hier,boost,svm,cosine)");
  fuse->add_option("--name", run_name, "output run name");

  auto* extract = app.add_subcommand("extract", "write the ranked ingredient run (T4)");
  ov_extract.attach(extract);

  auto* evaluate = app.add_subcommand("evaluate", "score a run against the gold standard");
  ov_eval.attach(evaluate);
  std::string run_path, gold_path, qrels_path, out_text, out_tsv;
  bool fold_accents = false;
  evaluate->add_option("--run", run_path, "run file")->required();
  evaluate->add_option("--gold", gold_path, "gold corpus XML (defaults to the test corpus)");
  evaluate->add_option("--qrels", qrels_path, "qrel file for T4");
  evaluate->add_flag("--fold-accents", fold_accents, "match ingredients without accents");
  evaluate->add_option("--out", out_text, "text report path (stdout when absent)");
  evaluate->add_option("--out-tsv", out_tsv, "TSV report path");

  auto* sweep = app.add_subcommand("sweep", "parameter grids: gini thresholds or ELECTRE sc/veto");
  ov_sweep.attach(sweep);
  std::string sweep_kind, gini_grid = "0:1:0.05", sc_grid = "0.5:1:0.05", veto_grid = "0.1:1:0.1", sweep_out,
                          sweep_gold;
  sweep->add_option("kind", sweep_kind, "gini or electre")->required()->check(CLI::IsMember({"gini", "electre"}));
  sweep->add_option("--thresholds", gini_grid, "from:to:step");
  sweep->add_option("--sc", sc_grid, "from:to:step");
  sweep->add_option("--veto", veto_grid, "from:to:step");
  sweep->add_option("--gold", sweep_gold, "gold corpus for electre (defaults to the test corpus)");
  sweep->add_option("--out", sweep_out, "output path (stdout when absent)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    for (char& ch : msg)
      if (ch == '\n' || ch == '\t') ch = ' ';
    std::cerr << Error(ErrorCode::Config, "cli", msg).one_line() << "\n";
    return static_cast<int>(ErrorCode::Config);
  }

  try {
    if (*train) {
      cmd_train(ov_train.build(), std::cerr);
    } else if (*classify) {
      cmd_classify(ov_classify.build(), std::cerr);
    } else if (*fuse) {
      const auto cfg = ov_fuse.build();
      std::vector<RunSpec> runs;
      if (runs_preset == "paper") {
        runs = paper_runs(cfg.task);
      } else if (!runs_preset.empty()) {
        throw Error(ErrorCode::Config, "cli", "unknown run preset '" + runs_preset + "'");
      } else {
        RunSpec r{run_name, {}, fuse_mode == "electre"};
        for (const auto& m : split(fuse_methods, ','))
          if (!m.empty()) r.methods.push_back(m);
        runs.push_back(r);
      }
      cmd_fuse(cfg, runs, std::cerr);
    } else if (*extract) {
      cmd_extract(ov_extract.build(), std::cerr);
    } else if (*evaluate) {
      const auto cfg = ov_eval.build();
      const auto rep = cmd_evaluate(cfg, run_path, gold_path.empty() ? cfg.paths.test : gold_path, qrels_path,
                                    fold_accents);
      emit(rep.text, out_text);
      if (!out_tsv.empty()) write_file(out_tsv, rep.tsv, "cli");
    } else if (*sweep) {
      const auto cfg = ov_sweep.build();
      const std::string out =
          sweep_kind == "gini"
              ? sweep_gini(cfg, parse_grid(gini_grid))
              : sweep_electre(cfg, sweep_gold.empty() ? cfg.paths.test : sweep_gold, parse_grid(sc_grid),
                              parse_grid(veto_grid));
      emit(out, sweep_out);
    }
  } catch (const Error& e) {
    std::cerr << e.one_line() << "\n";
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::cerr << Error(ErrorCode::Data, "cli", e.what()).one_line() << "\n";
    return static_cast<int>(ErrorCode::Data);
  }
  return 0;
}
