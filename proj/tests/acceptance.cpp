// One PASS/FAIL line per acceptance check; exit status 1 when any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sys/wait.h>

#include "deft/boost.hpp"
#include "deft/cosine.hpp"
#include "deft/eval.hpp"
#include "deft/extraction.hpp"
#include "deft/fusion.hpp"
#include "deft/svm.hpp"
#include "oracles/boost_oracle.hpp"
#include "oracles/electre_oracle.hpp"
#include "oracles/metrics_oracle.hpp"
#include "oracles/text_oracle.hpp"
#include "support.hpp"

using namespace deft;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Failure count of one check plus its first message.
struct Check {
  int failures = 0;
  std::string first;

  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures++ == 0) first = what;
  }
};

std::string sci(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1e", x);
  return buf;
}

std::vector<std::string> letters(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t c = 0; c < k; ++c) out.push_back(std::string(1, char('a' + c)));
  return out;
}

std::string fusion_oracle(Check& ck) {
  const auto t0 = Clock::now();
  SplitMix64 rng(101);
  for (int n = 0; n < 1000; ++n) {
    const std::size_t k = 3 + rng.below(2), m = 3 + rng.below(2);
    const auto cls = letters(k);
    oracle::ElectreCase c;
    c.sc = rng.uniform();
    ElectreParams p{{}, c.sc, {}, 1.0, 0.5};
    std::vector<ScoreVector> vs;
    for (std::size_t i = 0; i < m; ++i) {
      std::vector<double> s(k);
      for (double& x : s) x = rng.uniform();
      const std::string id = "m" + std::to_string(i);
      c.n.push_back(s);
      c.weight.push_back(0.5 + rng.uniform());
      c.veto.push_back(rng.uniform());
      p.method_weights[id] = c.weight.back();
      p.veto_values[id] = c.veto.back();
      vs.push_back(make_score_vector("r", id, cls, s));
    }
    const auto want = oracle::electre(c);
    const auto [decision, rel] = fuse_electre(vs, p);
    std::vector<std::string> kernel;
    for (auto i : want.kernel) kernel.push_back(cls[i]);
    ck.expect(rel.kernel == kernel, "kernel differs on instance " + std::to_string(n));
    ck.expect(decision == cls[want.decision], "decision differs on instance " + std::to_string(n));
  }
  const double secs = seconds_since(t0);
  ck.expect(secs < 5.0, "took " + std::to_string(secs) + " s");
  return "1000 instances, " + format_fixed(secs, 3) + " s";
}

std::string normalization(Check& ck) {
  SplitMix64 rng(202);
  double worst = 0;
  for (int n = 0; n < 1000; ++n) {
    const std::size_t k = 2 + rng.below(5);
    const auto cls = letters(k);
    std::vector<double> raw(k);
    const bool signed_case = n % 4 == 3;
    for (double& x : raw) x = signed_case ? rng.uniform() * 2 - 1 : rng.uniform() * 10;
    const auto out = normalize_scores(make_score_vector("r", "m", cls, raw));
    double sum = 0;
    for (const auto& [c, s] : out.scores) sum += s;
    worst = std::max(worst, std::abs(sum - 1.0));
    ck.expect(std::abs(sum - 1.0) <= 1e-12, "sum off by " + sci(sum - 1.0));
    if (signed_case) continue;
    // Scalings whose products and sums stay exact in binary floating point:
    // powers of two on arbitrary inputs, integers on small integer inputs.
    const double pow2 = std::ldexp(1.0, int(rng.below(41)) - 20);
    std::vector<double> scaled(k);
    for (std::size_t i = 0; i < k; ++i) scaled[i] = raw[i] * pow2;
    ck.expect(normalize_scores(make_score_vector("r", "m", cls, scaled)).scores == out.scores,
              "power-of-two scaling changed the output");
    std::vector<double> ints(k), ints_k(k);
    const double factor = double(1 + rng.below(1000));
    for (std::size_t i = 0; i < k; ++i) {
      ints[i] = double(rng.below(100));
      ints_k[i] = ints[i] * factor;
    }
    ck.expect(normalize_scores(make_score_vector("r", "m", cls, ints)).scores ==
                  normalize_scores(make_score_vector("r", "m", cls, ints_k)).scores,
              "integer scaling changed the output");
  }
  return "1000 vectors, max |sum-1| = " + sci(worst);
}

std::string boosting(Check& ck) {
  const Corpus corpus = load_corpus(testing_support::fixture("boost40.xml"), LabelKind::Difficulty);
  const Normalizer norm;
  const auto classes = corpus.classes();
  std::vector<BoostInstance> xs;
  std::vector<int> y;
  for (const auto& r : corpus.recipes) {
    xs.push_back(make_boost_instance(r, *r.gold_ingredients, norm));
    y.push_back(int(std::find(classes.begin(), classes.end(), *r.label(LabelKind::Difficulty)) - classes.begin()));
  }
  const auto labels = corpus.labels();
  BoostConfig cfg;
  cfg.max_rounds = 50;
  BoostTrace trace;
  const auto model = train_boost(xs, labels, {}, {}, cfg, &trace);
  ck.expect(trace.z.size() == 50, "stopped after " + std::to_string(trace.z.size()) + " rounds");
  double prod = 1.0;
  for (std::size_t t = 0; t < trace.z.size(); ++t) {
    ck.expect(prod * trace.z[t] <= prod, "Z product rose at round " + std::to_string(t + 1));
    prod *= trace.z[t];
    ck.expect(trace.weighted_error[t] < 0.5, "error >= 0.5 at round " + std::to_string(t + 1));
  }

  const auto o = oracle::adaboost_mh(xs, y, classes.size(), 50, cfg.smoothing_epsilon);
  ck.expect(o.chosen == model.rounds.size(), "oracle kept a different round count");
  double worst = 0;
  for (const auto& x : xs) {
    const auto a = model.margins(x);
    const auto b = o.margins(x, classes.size());
    for (std::size_t l = 0; l < a.size(); ++l) worst = std::max(worst, std::abs(a[l] - b[l]));
  }
  ck.expect(worst <= 1e-12, "margin gap " + sci(worst));

  auto inst = [](const char* word) {
    BoostInstance x;
    x.text[1] = {word, "commun"};
    return x;
  };
  const std::vector<BoostInstance> toy{inst("sucre"), inst("sucre"), inst("sel"), inst("sel")};
  const std::vector<std::string> toy_y{"Dessert", "Dessert", "Plat", "Plat"};
  BoostConfig three;
  three.max_rounds = 3;
  const auto toy_model = train_boost(toy, toy_y, {}, {}, three);
  for (std::size_t i = 0; i < toy.size(); ++i)
    ck.expect(score_boost(toy_model, toy[i]).argmax() == toy_y[i], "toy set misclassified");
  return "prod Z = " + sci(prod) + ", oracle margin gap " + sci(worst);
}

std::string cosine_gini(Check& ck) {
  const Corpus corpus = testing_support::six();
  const Normalizer norm;
  auto stats = std::make_shared<LexiconStats>(build_stats(corpus, corpus, norm));
  oracle::Collection coll;
  for (const auto& r : corpus.recipes) {
    auto d = norm(r.title);
    for (auto& t : norm(r.body)) d.push_back(t);
    coll.docs.push_back(d);
  }
  coll.labels = corpus.labels();
  for (const auto& t : coll.vocabulary())
    ck.expect(std::abs(*stats->gini(t) - coll.gini(t)) <= 1e-12, "gini differs for " + t);

  const auto docs = corpus_terms(corpus, norm);
  std::size_t prev = SIZE_MAX;
  for (int step = 0; step <= 20; ++step) {
    const double th = step / 20.0;
    const auto model = train_cosine(stats, th);
    std::set<std::string> support;
    for (const auto& v : model.class_vectors)
      for (const auto& [t, w] : v.entries()) support.insert(t);
    ck.expect(support.size() <= prev, "support grew at threshold " + format_fixed(th, 2));
    prev = support.size();
    for (const auto& d : docs)
      for (double s : cosine_scores(model, d)) ck.expect(s >= 0.0 && s <= 1.0, "score outside [0,1]");
  }
  return std::to_string(coll.vocabulary().size()) + " terms, 21 thresholds";
}

// Three classes, 240 documents, every one of `vocab` terms used at least once.
struct SyntheticVocab {
  std::vector<TermCounts> docs;
  std::vector<std::string> labels;

  SyntheticVocab(std::size_t vocab, std::uint64_t seed) {
    SplitMix64 rng(seed);
    const std::size_t n = 240;
    docs.resize(n);
    for (std::size_t i = 0; i < n; ++i) labels.push_back(std::string(1, char('a' + i % 3)));
    auto term = [](std::size_t t) { return "t" + std::to_string(t); };
    for (std::size_t t = 0; t < vocab; ++t) ++docs[(t * 7919) % n][term(t)];
    for (std::size_t i = 0; i < n; ++i)
      for (int j = 0; j < 30; ++j) {
        // Class-leaning terms: each class draws more often from its own third.
        const std::size_t third = vocab / 3;
        const std::size_t t = rng.below(2) ? (i % 3) * third + rng.below(third) : rng.below(vocab);
        ++docs[i][term(t)];
      }
  }
};

std::string svm_checks(Check& ck) {
  const SyntheticVocab data(12000, 303);
  const auto stats = build_stats(data.docs, data.labels, data.docs);
  std::vector<SparseVector> x;
  for (const auto& d : data.docs) x.push_back(tfidf_vector(d, stats));
  const SvmConfig cfg{1e-3, 3, 9};
  const auto filter = mutual_information_select(stats, 10000);
  ck.expect(stats.terms.size() == 12000, "vocabulary has " + std::to_string(stats.terms.size()) + " terms");
  ck.expect(filter.size() == 10000, "filter kept " + std::to_string(filter.size()) + " terms");
  const auto a = train_ovo(x, data.labels, cfg, filter);
  const auto b = train_ovo(x, data.labels, cfg, filter);
  ck.expect(a.serialize() == b.serialize(), "same seed, different model bytes");
  std::size_t nonzero = 0;
  for (const auto& pm : a.pairs)
    for (const auto& [t, w] : pm.weights.entries()) {
      ++nonzero;
      ck.expect(filter.count(t) > 0, "weight on unfiltered term " + t);
    }

  const SyntheticVocab probe(12000, 404);
  double worst = 0;
  for (std::size_t i = 0; i < 100; ++i) {
    const auto v = tfidf_vector(probe.docs[i], stats);
    for (const auto& pm : a.pairs) worst = std::max(worst, std::abs(pm.margin(v) + pm.mirrored().margin(v)));
  }
  ck.expect(worst <= 1e-12, "antisymmetry gap " + sci(worst));
  return std::to_string(nonzero) + " nonzero weights, antisymmetry gap " + sci(worst);
}

std::string metrics(Check& ck) {
  SplitMix64 rng(505);
  const std::vector<std::string> labels{"Très facile", "Facile", "Moyennement difficile", "Difficile"};
  const std::map<std::string, int> ranks{{labels[0], 0}, {labels[1], 1}, {labels[2], 2}, {labels[3], 3}};
  const std::vector<std::string> pool{"sel", "sucre", "beurre", "oeufs", "lait", "farine", "ail", "thym"};
  double worst = 0;
  for (int n = 0; n < 200; ++n) {
    std::vector<int> g(20), p(20);
    std::map<std::string, std::string> gold, pred;
    RankedRun run;
    QrelSet qrels;
    double ap_sum = 0;
    for (int i = 0; i < 20; ++i) {
      const std::string id = "r" + std::to_string(i);
      g[i] = int(rng.below(4));
      p[i] = int(rng.below(4));
      gold[id] = labels[g[i]];
      pred[id] = labels[p[i]];
      auto items = pool;
      deterministic_shuffle(items, rng);
      const std::vector<std::string> ranked(items.begin(), items.begin() + rng.below(9));
      deterministic_shuffle(items, rng);
      const std::vector<std::string> rel(items.begin(), items.begin() + 1 + rng.below(8));
      run[id] = ranked;
      qrels[id] = {rel.begin(), rel.end()};
      ap_sum += oracle::average_precision(ranked, rel);
    }
    const auto want = oracle::classification(g, p, 4);
    const auto rep = classification_report(gold, pred, {labels.begin(), labels.end()}, &ranks);
    const double map = mean_average_precision(run, qrels).map;
    for (double d : {rep.micro_f - want.micro_f, rep.macro_f - want.macro_f,
                     *rep.mean_distance - want.mean_distance, map - ap_sum / 20})
      worst = std::max(worst, std::abs(d));
  }
  ck.expect(worst <= 1e-12, "oracle gap " + sci(worst));
  ck.expect(average_precision({"a", "b"}, {"a", "b"}) == 1.0, "perfect run AP != 1");
  ck.expect(average_precision({"x", "a"}, {"a", "b"}) == 0.25, "[x,a] vs {a,b} != 0.25");
  return "200 instances, max gap " + sci(worst);
}

std::string extraction(Check& ck) {
  const NormConfig norm;
  const Corpus train = load_corpus(testing_support::fixture("synthetic_train.xml"), LabelKind::None);
  const Corpus test = load_corpus(testing_support::fixture("synthetic_test.xml"), LabelKind::None);
  const auto lex = build_lexicon(train, norm);
  const auto allowed = lex.emittable();
  std::size_t emitted = 0, posteriors = 0;
  for (const auto* c : {&test, &train})
    for (const auto& r : c->recipes) {
      const auto ex = extract_candidates(r, lex, norm);
      for (const auto& cand : resolve_generics(ex.candidates, ex.generics, lex)) {
        ++emitted;
        ck.expect(allowed.count(cand.ingredient) > 0, "emitted '" + cand.ingredient + "' outside the lexicon");
      }
      for (const auto& g : ex.generics) {
        const auto gp = generic_posteriors(ex.candidates, g, lex);
        if (gp.posterior.empty()) continue;
        double sum = 0;
        for (const auto& [x, p] : gp.posterior) sum += p;
        ++posteriors;
        ck.expect(std::abs(sum - 1.0) <= 1e-12, "posterior sum " + sci(sum));
      }
    }
  const Recipe none{"x", "Mousse", "Mélanger énergiquement tous les ingrédients.", {}, {}, {}};
  ck.expect(extract_ingredients(none, lex, norm).empty(), "no-hit recipe produced candidates");
  ck.expect(posteriors > 0, "no generic mention exercised");
  return std::to_string(emitted) + " ingredients emitted, " + std::to_string(posteriors) + " posteriors";
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(DEFT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string end_to_end(Check& ck) {
  const auto t0 = Clock::now();
  const std::string dir = testing_support::scratch("acceptance_e2e");
  std::size_t compared = 0;
  for (const std::string task : {"T1", "T2", "T4"}) {
    const std::string cfg = testing_support::fixture("synthetic/config_" + task + ".json");
    const std::string where = " -c " + cfg + " --models " + dir + "/" + task + "/models --runs-dir " + dir + "/" +
                              task + "/runs";
    std::vector<std::string> steps{"train"};
    if (task == "T4") steps.push_back("extract");
    else steps.insert(steps.end(), {"classify", "fuse --runs paper"});
    for (const auto& s : steps) ck.expect(run_cli(s + where) == 0, task + " " + s + " failed");

    const fs::path golden = fs::path(DEFT_GOLDEN) / task;
    ck.expect(fs::is_directory(golden), "no golden directory for " + task);
    if (!fs::is_directory(golden)) continue;
    for (const auto& e : fs::directory_iterator(golden)) {
      const fs::path produced = fs::path(dir) / task / "runs" / e.path().filename();
      const bool same = fs::exists(produced) &&
                        read_file(produced.string(), "test") == read_file(e.path().string(), "test");
      ck.expect(same, task + "/" + e.path().filename().string() + " differs from golden");
      ++compared;
    }
  }
  const double secs = seconds_since(t0);
  ck.expect(compared >= 13, "only " + std::to_string(compared) + " golden files");
  ck.expect(secs < 60.0, "took " + std::to_string(secs) + " s");
  return std::to_string(compared) + " files, " + format_fixed(secs, 2) + " s";
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<std::string(Check&)>>> checks{
      {"fusion matches brute-force outranking", fusion_oracle},
      {"score normalization invariants", normalization},
      {"boosting properties and oracle agreement", boosting},
      {"cosine and gini correctness", cosine_gini},
      {"svm determinism, antisymmetry and term filter", svm_checks},
      {"metrics match brute-force scoring", metrics},
      {"extraction stays in the closed world", extraction},
      {"end-to-end runs match golden files", end_to_end},
  };
  int failed = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Check ck;
    std::string detail;
    try {
      detail = checks[i].second(ck);
    } catch (const std::exception& e) {
      ck.expect(false, std::string("exception: ") + e.what());
    }
    const bool ok = ck.failures == 0;
    failed += !ok;
    std::cout << (ok ? "PASS" : "FAIL") << "  " << i + 1 << ". " << checks[i].first;
    if (ok) std::cout << " (" << detail << ")";
    else std::cout << ": " << ck.first << (ck.failures > 1 ? " (+" + std::to_string(ck.failures - 1) + " more)" : "");
    std::cout << "\n";
  }
  std::cout << (failed ? std::to_string(failed) + " of 8 failed" : "all 8 passed") << "\n";
  return failed ? 1 : 0;
}
