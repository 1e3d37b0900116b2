#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "dosml/evaluation.hpp"
#include "dosml/synth.hpp"

using namespace dosml;

namespace {

// Expands a confusion matrix into (truth, prediction) pairs.
void from_confusion(const std::vector<std::vector<int>>& cm, std::vector<int>& truth, std::vector<int>& pred) {
  for (std::size_t t = 0; t < cm.size(); ++t)
    for (std::size_t p = 0; p < cm[t].size(); ++p)
      for (int i = 0; i < cm[t][p]; ++i) {
        truth.push_back(static_cast<int>(t));
        pred.push_back(static_cast<int>(p));
      }
}

Dataset blobs(int classes, int d, int informative, double sep, std::size_t n, std::uint64_t seed) {
  BlobSpec s;
  s.n_classes = classes;
  s.d = d;
  s.n_informative = informative;
  s.separation = sep;
  s.n_per_class = n;
  s.seed = seed;
  return gen_blobs(s);
}

}  // namespace

TEST_CASE("three class worked example") {
  std::vector<int> t, p;
  from_confusion({{2, 1, 0}, {0, 3, 0}, {1, 0, 3}}, t, p);
  const auto r = evaluate_predictions(t, p, 3, {"benign", "dos", "scan"});
  CHECK(r.n == 10);
  CHECK(r.per_class[0].precision == doctest::Approx(2.0 / 3.0));
  CHECK(r.per_class[0].recall == doctest::Approx(2.0 / 3.0));
  CHECK(r.per_class[1].precision == doctest::Approx(0.75));
  CHECK(r.per_class[1].recall == doctest::Approx(1.0));
  CHECK(r.per_class[2].precision == doctest::Approx(1.0));
  CHECK(r.per_class[2].recall == doctest::Approx(0.75));
  CHECK(r.accuracy == doctest::Approx(0.8));
  CHECK(r.weighted_recall == r.accuracy);
  CHECK(r.fpr_benign == doctest::Approx(1.0 / 3.0));
  CHECK(r.confusion[0] == std::vector<std::size_t>{2, 1, 0});
  const double wp = (3 * (2.0 / 3.0) + 3 * 0.75 + 4 * 1.0) / 10.0;
  CHECK(r.weighted_precision == doctest::Approx(wp));
  CHECK(r.per_class_csv().rfind("class,precision,recall,f1,support,flags\nbenign,66.67,66.67,66.67,3,", 0) == 0);
}

TEST_CASE("perfect and all-benign predictions") {
  const std::vector<int> t{0, 0, 1, 2, 2, 1};
  const auto perfect = evaluate_predictions(t, t, 3);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.fpr_benign == 0.0);
  for (const auto& m : perfect.per_class) CHECK(m.f1 == 1.0);

  const std::vector<int> zeros(t.size(), 0);
  const auto benign = evaluate_predictions(t, zeros, 3);
  CHECK(benign.fpr_benign == 0.0);
  CHECK(benign.per_class[1].recall == 0.0);
  CHECK(benign.per_class[2].recall == 0.0);
  CHECK(benign.per_class[1].precision_undefined);
  CHECK(benign.per_class[1].precision == 0.0);
  CHECK(benign.per_class_csv().find("precision_undefined") != std::string::npos);

  const std::vector<int> no_benign{1, 2, 1};
  CHECK_FALSE(evaluate_predictions(no_benign, no_benign, 3).fpr_defined);
  CHECK_THROWS(evaluate_predictions(t, std::vector<int>{0}, 3));
}

TEST_CASE("random reports satisfy the micro identities") {
  std::mt19937_64 rng(1);
  for (int trial = 0; trial < 300; ++trial) {
    const int c = 2 + static_cast<int>(rng() % 5);
    const std::size_t n = 1 + rng() % 200;
    std::vector<int> t, p;
    for (std::size_t i = 0; i < n; ++i) {
      t.push_back(static_cast<int>(rng() % c));
      p.push_back(static_cast<int>(rng() % c));
    }
    const auto r = evaluate_predictions(t, p, c);
    std::size_t total = 0, tp = 0;
    for (int k = 0; k < c; ++k) {
      std::size_t row = 0;
      for (int j = 0; j < c; ++j) row += r.confusion[k][j];
      CHECK(row == r.per_class[k].support);
      total += row;
      tp += r.confusion[k][k];
    }
    CHECK(total == n);
    CHECK(r.weighted_recall == r.accuracy);
    CHECK(static_cast<double>(tp) == doctest::Approx(r.accuracy * static_cast<double>(n)));

    // permuting labels permutes the confusion matrix
    std::vector<int> perm(static_cast<std::size_t>(c));
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<int> t2, p2;
    for (std::size_t i = 0; i < n; ++i) {
      t2.push_back(perm[static_cast<std::size_t>(t[i])]);
      p2.push_back(perm[static_cast<std::size_t>(p[i])]);
    }
    const auto r2 = evaluate_predictions(t2, p2, c);
    for (int a = 0; a < c; ++a)
      for (int b = 0; b < c; ++b) CHECK(r2.confusion[perm[a]][perm[b]] == r.confusion[a][b]);

    // redistributing attack predictions leaves fpr alone
    auto p3 = p;
    for (std::size_t i = 0; i < n; ++i) {
      if (p3[i] != 0) p3[i] = 1 + static_cast<int>(rng() % (c - 1));
    }
    const auto r3 = evaluate_predictions(t, p3, c);
    CHECK(r3.fpr_benign == r.fpr_benign);
  }
}

TEST_CASE("variance sweep is monotone and deterministic") {
  const auto ds = blobs(3, 10, 2, 8, 60, 5);
  SweepConfig cfg;
  cfg.targets = {0.5, 0.7, 0.9, 0.99};
  cfg.folds = 3;
  cfg.seed = 2;
  const auto rows = variance_sweep(ds, cfg);
  REQUIRE(rows.size() == 4);
  for (std::size_t i = 1; i < rows.size(); ++i) CHECK(rows[i].n_components >= rows[i - 1].n_components);
  for (const auto& r : rows) {
    CHECK(r.fold_components_min <= r.fold_components_max);
    CHECK(r.accuracy >= 0);
    CHECK(r.accuracy <= 1);
    CHECK(r.recall == doctest::Approx(r.accuracy));
  }
  cfg.threads = 2;
  const auto again = variance_sweep(ds, cfg);
  CHECK(sweep_csv(again, false) == sweep_csv(rows, false));
  const auto csv = sweep_csv(rows, false);
  CHECK(csv.rfind("variance_pct,n_components,", 0) == 0);
  CHECK(csv.find("time") == std::string::npos);
  CHECK(sweep_csv(rows, true).find("time") != std::string::npos);
  CHECK(sweep_json(rows).size() == 4);
}

TEST_CASE("keeping more variance helps when small directions carry the signal") {
  const auto ds = blobs(2, 10, 2, 4, 150, 9);
  SweepConfig cfg;
  cfg.targets = {0.5, 0.99};
  cfg.folds = 3;
  cfg.seed = 1;
  const auto rows = variance_sweep(ds, cfg);
  CHECK(rows[1].accuracy >= rows[0].accuracy);
}

TEST_CASE("comparison on separable data is perfect in both arms") {
  const auto ds = blobs(3, 3, 3, 30, 40, 3);
  const auto split = stratified_split(ds, {}, 1);
  CompareConfig cfg;
  for (auto f : {Family::dt, Family::rf, Family::knn, Family::lda, Family::qda, Family::svm_linear}) {
    ModelSpec s;
    s.family = f;
    s.n_trees = 10;
    s.seed = 4;
    cfg.specs.push_back(s);
  }
  const auto r = compare_models(split.train, split.test, cfg);
  REQUIRE(r.with_pca.size() == 6);
  REQUIRE(r.without_pca.size() == 6);
  for (const auto* arm : {&r.with_pca, &r.without_pca}) {
    for (const auto& row : *arm) {
      CHECK_MESSAGE(row.report.weighted_f1 == doctest::Approx(1.0), to_string(row.family));
      for (const auto& m : row.report.per_class) CHECK(m.f1 == doctest::Approx(1.0));
    }
  }
  CHECK(r.with_pca[0].n_components == r.n_components);
  CHECK(r.without_pca[0].n_components == 3);
  const auto csv = compare_csv(r.with_pca, false);
  CHECK(csv.rfind("model,pca,n_inputs,precision,recall,f1,accuracy,fpr\n", 0) == 0);
  CHECK(compare_json(r).contains("with_pca"));
}

TEST_CASE("refit on the top features") {
  // only column 2 separates the classes
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  Dataset ds;
  ds.X.resize(200, 4);
  for (int i = 0; i < 200; ++i) {
    const int c = i % 2;
    ds.X.row(i) << nd(rng), nd(rng), (c ? 5.0 : -5.0) + nd(rng) * 0.1, nd(rng);
    ds.y.push_back(c);
  }
  ds.feature_names = {"a", "b", "c", "d"};
  ds.class_names = {"benign", "attack"};
  const auto split = stratified_split(ds, {}, 3);
  ModelSpec spec;
  const auto dt = fit(spec, split.train.X, split.train.y, 2);
  const auto imp = gini_importance(dt, split.train.feature_names);
  CHECK(imp.entries[0].first == "c");
  const auto one = refit_on_top_features(split.train, split.test, imp, 1);
  CHECK(one.columns == std::vector<std::string>{"c"});
  CHECK(one.report.accuracy == 1.0);

  const auto all = refit_on_top_features(split.train, split.test, imp, 4);
  const auto plain = evaluate(dt, split.test);
  CHECK(all.report.confusion == plain.confusion);
}
