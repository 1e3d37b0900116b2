#include "criteria.hpp"

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "../../tools/commands.hpp"
#include "../oracles/oracles.hpp"
#include "dosml/classifiers.hpp"
#include "dosml/config.hpp"
#include "dosml/dataset.hpp"
#include "dosml/evaluation.hpp"
#include "dosml/flow_table.hpp"
#include "dosml/io.hpp"
#include "dosml/packet.hpp"
#include "dosml/pca.hpp"
#include "dosml/synth.hpp"

namespace acceptance {

namespace fs = std::filesystem;
using dosml::Matrix;

namespace {

// Collects failures; the first few are kept for the report line.
struct Checker {
  std::size_t checks = 0;
  std::size_t failures = 0;
  std::vector<std::string> notes;

  void expect(bool ok, const std::string& what) {
    ++checks;
    if (ok) return;
    ++failures;
    if (notes.size() < 4) notes.push_back(what);
  }
  void fill(Result& r, const std::string& summary) const {
    r.status = failures == 0 ? Status::pass : Status::fail;
    std::ostringstream out;
    out << summary << "; " << checks - failures << "/" << checks << " checks";
    for (const auto& n : notes) out << "; " << n;
    r.detail = out.str();
  }
};

oracle::Rows to_rows(const Matrix& X) {
  oracle::Rows rows(static_cast<std::size_t>(X.rows()), std::vector<double>(static_cast<std::size_t>(X.cols())));
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    for (Eigen::Index j = 0; j < X.cols(); ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = X(i, j);
  }
  return rows;
}

std::vector<double> row_of(const Matrix& X, Eigen::Index i) {
  std::vector<double> r(static_cast<std::size_t>(X.cols()));
  for (Eigen::Index j = 0; j < X.cols(); ++j) r[static_cast<std::size_t>(j)] = X(i, j);
  return r;
}

Matrix random_normal(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<double> g(0.0, 1.0);
  Matrix X(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < d; ++j) X(i, j) = g(rng);
  }
  return X;
}

// ---------------------------------------------------------------------------

void flow_semantics(Result& r) {
  Checker c;
  std::size_t flows = 0;
  for (std::uint64_t seed : {0ULL, 1ULL, 2024ULL}) {
    for (const auto& name : dosml::scenario_catalog()) {
      const auto sc = dosml::gen_flow_scenario(name, seed);
      // Through the text fixture format, as the CLI would read it.
      const auto packets = dosml::parse_fixture(sc.fixture_text());
      c.expect(packets == sc.packets, name + ": fixture round trip changed packets");
      const auto ex = dosml::extract_flows(packets);
      flows += ex.flows.size();
      for (const auto& p : dosml::check_manifest(sc.manifest, ex)) c.expect(false, name + ": " + p);
      c.expect(true, name);
    }
  }
  c.fill(r, std::to_string(dosml::scenario_catalog().size()) + " scenarios x 3 seeds, " + std::to_string(flows) +
                " flows");
}

void pca_algebra(Result& r) {
  Checker c;
  std::mt19937_64 rng(20240601);
  const Matrix Z = random_normal(rng, 500, 20);
  const Matrix A = random_normal(rng, 20, 20);
  Matrix X = Z * A;
  for (Eigen::Index j = 0; j < X.cols(); ++j) X.col(j).array() += 3.0 * static_cast<double>(j) - 10.0;
  const auto pca = dosml::pca_fit(X);

  const Matrix gram = pca.components.transpose() * pca.components;
  const double ortho = (gram - Matrix::Identity(20, 20)).cwiseAbs().maxCoeff();
  c.expect(ortho <= 1e-8, "orthonormality error " + std::to_string(ortho));
  const double ratio_sum = pca.explained_variance_ratio.sum();
  c.expect(std::fabs(ratio_sum - 1.0) <= 1e-9, "ratio sum " + dosml::format_exact(ratio_sum));
  const Matrix back = dosml::pca_inverse_transform(pca, dosml::pca_transform(pca, X, 20));
  const double recon = (back - X).cwiseAbs().maxCoeff();
  c.expect(recon < 1e-6, "reconstruction error " + std::to_string(recon));

  double worst = 0;
  for (int d = 1; d <= 4; ++d) {
    for (int rep = 0; rep < 5; ++rep) {
      const Matrix Y = random_normal(rng, 60, d) * random_normal(rng, d, d);
      const auto p = dosml::pca_fit(Y);
      const auto ev = oracle::symmetric_eigenvalues(oracle::population_covariance(to_rows(Y)));
      c.expect(ev.size() == static_cast<std::size_t>(d), "oracle root count at d=" + std::to_string(d));
      for (std::size_t k = 0; k < ev.size() && k < static_cast<std::size_t>(d); ++k) {
        const double err = std::fabs(ev[k] - p.eigenvalues[static_cast<Eigen::Index>(k)]);
        worst = std::max(worst, err);
        c.expect(err <= 1e-9, "eigenvalue mismatch d=" + std::to_string(d) + " err " + std::to_string(err));
      }
    }
  }
  std::ostringstream s;
  s << "ortho " << ortho << ", ratio sum-1 " << ratio_sum - 1.0 << ", recon " << recon << ", eig err " << worst;
  c.fill(r, s.str());
}

void classifier_oracles(Result& r) {
  Checker c;
  std::mt19937_64 rng(777);

  // DT against exhaustive CART on small integer-valued fixtures (many ties).
  for (int f = 0; f < 25; ++f) {
    const int n = 4 + static_cast<int>(rng() % 47);
    const int d = 1 + static_cast<int>(rng() % 3);
    const int C = 2 + static_cast<int>(rng() % 2);
    const int depths[] = {1, 2, 3, 30};
    const int depth = depths[rng() % 4];
    Matrix X(n, d);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X(i, j) = static_cast<double>(rng() % 6);
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng() % static_cast<unsigned>(C));
    }
    const auto rows = to_rows(X);
    const auto ref = oracle::fit_cart(rows, y, C, depth, 2);
    const auto dt = dosml::DecisionTree::fit(X, y, C, {depth, 2, 0});
    Matrix Q(n + 40, d);
    Q.topRows(n) = X;
    for (int i = n; i < n + 40; ++i) {
      for (int j = 0; j < d; ++j) Q(i, j) = static_cast<double>(rng() % 15) / 2.0 - 1.0;
    }
    const auto pred = dt.predict(Q);
    bool same = true;
    for (Eigen::Index i = 0; i < Q.rows(); ++i) same = same && pred[static_cast<std::size_t>(i)] == ref.predict(row_of(Q, i));
    c.expect(same, "DT fixture " + std::to_string(f) + " differs from CART oracle");

    // A single unbootstrapped tree that sees every feature is the plain DT.
    dosml::ModelSpec rs;
    rs.family = dosml::Family::rf;
    rs.n_trees = 1;
    rs.bootstrap = false;
    rs.max_features = d;
    rs.max_depth = depth;
    rs.seed = f;
    const auto rf = dosml::RandomForest::fit(X, y, C, rs);
    c.expect(rf.predict(Q) == pred, "RF(1 tree) fixture " + std::to_string(f) + " differs from DT");
  }
  {
    Matrix X(4, 2);
    X << 0, 0, 0, 1, 1, 0, 1, 1;
    const std::vector<int> y{0, 1, 1, 0};
    const auto dt = dosml::DecisionTree::fit(X, y, 2, {2, 2, 0});
    c.expect(dt.predict(X) == y, "DT does not solve XOR");
  }

  // k-NN: k-d tree search against a full sort, on a coarse grid so that
  // distance ties are common.
  for (int f = 0; f < 12; ++f) {
    const int ns[] = {20, 60, 120, 200};
    const int n = ns[f % 4];
    const int d = 2 + f % 3;
    const int C = 2 + f % 3;
    const int ks[] = {1, 3, 5, 7};
    const int k = ks[(f / 3) % 4];
    Matrix X(n, d);
    std::vector<int> y(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) X(i, j) = static_cast<double>(rng() % 5);
      y[static_cast<std::size_t>(i)] = static_cast<int>(rng() % static_cast<unsigned>(C));
    }
    const auto knn = dosml::KnnClassifier::fit(X, y, C, k, true, 1);
    c.expect(knn.uses_kdtree(), "k-d tree not built");
    const auto rows = to_rows(X);
    Matrix Q(n + 50, d);
    Q.topRows(n) = X;
    for (int i = n; i < n + 50; ++i) {
      for (int j = 0; j < d; ++j) Q(i, j) = static_cast<double>(rng() % 11) / 2.0 - 0.5;
    }
    const auto pred = knn.predict(Q);
    bool same_pred = true, same_nn = true;
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
      const auto q = row_of(Q, i);
      same_pred = same_pred && pred[static_cast<std::size_t>(i)] == oracle::knn_predict(rows, y, C, k, q);
      same_nn = same_nn && knn.neighbours(Q, i) == oracle::knn_indices(rows, k, q);
    }
    c.expect(same_pred, "k-NN fixture " + std::to_string(f) + " predictions differ from brute force");
    c.expect(same_nn, "k-NN fixture " + std::to_string(f) + " neighbour lists differ from brute force");
  }

  // Gaussian discriminants against closed-form 2-D formulas.
  double worst = 0;
  for (int f = 0; f < 10; ++f) {
    const int n = 30;
    Matrix X = random_normal(rng, n, 2);
    std::vector<int> y(n);
    for (int i = 0; i < n; ++i) {
      y[static_cast<std::size_t>(i)] = i < n / 2 + f % 5 ? 0 : 1;
      if (y[static_cast<std::size_t>(i)] == 1) {
        X(i, 0) = 1.5 * X(i, 0) + 2.0;
        X(i, 1) = 0.5 * X(i, 1) + 0.7 * X(i, 0) - 1.0;
      }
    }
    const auto lda = dosml::Lda::fit(X, y, 2, 1e-6);
    const auto qda = dosml::Qda::fit(X, y, 2, 1e-6);
    const auto rows = to_rows(X);
    const Matrix Q = random_normal(rng, 20, 2) * 2.0;
    const Matrix pl = lda.posteriors(Q), pq = qda.posteriors(Q);
    for (Eigen::Index i = 0; i < Q.rows(); ++i) {
      const auto q = row_of(Q, i);
      const auto hl = oracle::lda_posterior_2d(rows, y, 1e-6, q);
      const auto hq = oracle::qda_posterior_2d(rows, y, 1e-6, q);
      const double e = std::max({std::fabs(pl(i, 0) - hl.p0), std::fabs(pl(i, 1) - hl.p1), std::fabs(pq(i, 0) - hq.p0),
                                 std::fabs(pq(i, 1) - hq.p1)});
      worst = std::max(worst, e);
    }
  }
  c.expect(worst <= 1e-9, "discriminant posterior error " + std::to_string(worst));
  {
    // Unit-variance classes at (+1, 0) and (-1, 0).
    Matrix X(8, 2);
    X << 2, 1, 0, 1, 2, -1, 0, -1, 0, 1, -2, 1, 0, -1, -2, -1;
    const std::vector<int> y{0, 0, 0, 0, 1, 1, 1, 1};
    const auto lda = dosml::Lda::fit(X, y, 2, 1e-6);
    Matrix q(1, 2);
    q << 0.1, 7;
    c.expect(lda.predict(q)[0] == 0, "LDA boundary example");
  }
  std::ostringstream s;
  s << "25 DT/RF fixtures, 12 k-NN fixtures, 10 discriminant fixtures (max posterior err " << worst << ")";
  c.fill(r, s.str());
}

void metric_identities(Result& r) {
  Checker c;
  std::mt19937_64 rng(4242);
  for (int f = 0; f < 1000; ++f) {
    const int C = 2 + static_cast<int>(rng() % 7);
    const int n = 1 + static_cast<int>(rng() % 300);
    std::vector<int> truth(static_cast<std::size_t>(n)), pred(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      truth[static_cast<std::size_t>(i)] = static_cast<int>(rng() % static_cast<unsigned>(C));
      pred[static_cast<std::size_t>(i)] =
          rng() % 3 == 0 ? static_cast<int>(rng() % static_cast<unsigned>(C)) : truth[static_cast<std::size_t>(i)];
    }
    const auto rep = dosml::evaluate_predictions(truth, pred, C);
    c.expect(rep.weighted_recall == rep.accuracy, "weighted recall != accuracy in fixture " + std::to_string(f));
    std::size_t total = 0, benign = 0, benign_flagged = 0;
    for (const auto& row : rep.confusion) {
      for (auto v : row) total += v;
    }
    for (int i = 0; i < n; ++i) {
      if (truth[static_cast<std::size_t>(i)] != 0) continue;
      ++benign;
      if (pred[static_cast<std::size_t>(i)] != 0) ++benign_flagged;
    }
    c.expect(total == static_cast<std::size_t>(n), "confusion total");
    c.expect(rep.fpr_defined == (benign > 0), "fpr defined flag");
    if (benign > 0) {
      c.expect(rep.fpr_benign == static_cast<double>(benign_flagged) / static_cast<double>(benign), "fpr definition");
    }
    auto moved = pred;
    for (auto& p : moved) {
      if (p != 0) p = 1 + static_cast<int>(rng() % static_cast<unsigned>(C - 1));
    }
    const auto rep2 = dosml::evaluate_predictions(truth, moved, C);
    c.expect(rep2.fpr_benign == rep.fpr_benign && rep2.fpr_defined == rep.fpr_defined,
             "fpr changed when attack predictions were redistributed");
  }
  c.fill(r, "1000 random confusion fixtures");
}

void synthetic_end_to_end(Result& r, int threads) {
  Checker c;
  dosml::BlobSpec spec;
  spec.n_classes = 6;
  spec.d = 20;
  spec.n_informative = 4;
  spec.separation = 8;
  spec.noise = 1;
  spec.n_per_class = 2000;
  spec.seed = 7;
  const auto ds = dosml::gen_blobs(spec);

  // Leave-one-out 1-NN by brute force bounds what any learner can reach.
  const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> X = ds.X;
  const auto n = X.rows();
  std::vector<double> best(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<Eigen::Index> arg(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = (X.row(i) - X.row(j)).squaredNorm();
      if (dist < best[static_cast<std::size_t>(i)]) best[static_cast<std::size_t>(i)] = dist, arg[static_cast<std::size_t>(i)] = j;
      if (dist < best[static_cast<std::size_t>(j)]) best[static_cast<std::size_t>(j)] = dist, arg[static_cast<std::size_t>(j)] = i;
    }
  }
  std::size_t hits = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    hits += ds.y[static_cast<std::size_t>(i)] == ds.y[static_cast<std::size_t>(arg[static_cast<std::size_t>(i)])];
  }
  const double loo = static_cast<double>(hits) / static_cast<double>(n);
  c.expect(loo >= 0.99, "1-NN leave-one-out accuracy " + std::to_string(loo) + " < 0.99");

  const auto split = dosml::stratified_split(ds, {}, 7);
  dosml::SweepConfig sc;
  sc.seed = 7;
  sc.threads = threads;
  const auto rows = dosml::variance_sweep(split.train, sc);
  bool monotone = true;
  for (std::size_t i = 1; i < rows.size(); ++i) monotone = monotone && rows[i].n_components >= rows[i - 1].n_components;
  c.expect(monotone, "component counts decrease across targets");

  const auto scaler = dosml::Scaler::fit(split.train.X);
  const auto Xtr = scaler.apply(split.train.X), Xte = scaler.apply(split.test.X);
  const auto pca = dosml::pca_fit(Xtr);
  const int k = dosml::select_components(pca, 0.95);
  dosml::ModelSpec dt;
  dt.seed = 7;
  const auto m = dosml::fit(dt, dosml::pca_transform(pca, Xtr, k), split.train.y, ds.n_classes());
  const auto rep = dosml::evaluate_predictions(split.test.y, m.predict(dosml::pca_transform(pca, Xte, k)),
                                               ds.n_classes());
  c.expect(rep.accuracy >= 0.95, "DT accuracy at 95% variance " + std::to_string(rep.accuracy));

  std::ostringstream s;
  s << "LOO 1-NN " << loo << ", components";
  for (const auto& row : rows) s << ' ' << row.n_components;
  s << ", DT@0.95 (" << k << " comps) accuracy " << rep.accuracy;
  c.fill(r, s.str());
}

void lycos(Result& r, const std::string& dir, int threads) {
  if (dir.empty() || !fs::exists(dir)) {
    r.status = Status::skip;
    r.detail = dir.empty() ? "LYCOS-IDS2017 not configured (set lycos_dir)" : "LYCOS-IDS2017 not found at " + dir;
    return;
  }
  Checker c;
  const auto raw = dosml::load_csv_path(dir, dosml::CsvSchema::lycos());
  const auto ds = dosml::drop_excluded(raw);
  const auto split = dosml::stratified_split(ds, {}, 42);
  std::ostringstream s;
  s << raw.rows() << " rows (" << raw.dropped_nonfinite << " dropped)";

  int hulk = -1;
  for (int k = 0; k < ds.n_classes(); ++k) {
    std::string name = ds.class_names[static_cast<std::size_t>(k)];
    for (auto& ch : name) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    if (name.find("hulk") != std::string::npos) hulk = k;
  }
  c.expect(hulk >= 0, "no DoS_hulk class");
  if (hulk >= 0) {
    const auto total = ds.class_counts()[static_cast<std::size_t>(hulk)];
    const auto train = split.train.class_counts()[static_cast<std::size_t>(hulk)];
    c.expect(total == 79494, "DoS_hulk total " + std::to_string(total));
    c.expect(train == 39747, "DoS_hulk train " + std::to_string(train));
    s << ", hulk " << total << "/" << train;
  }

  dosml::SweepConfig sc;
  sc.targets = {0.5, 0.8, 0.9};
  sc.seed = 42;
  sc.threads = threads;
  const auto rows = dosml::variance_sweep(split.train, sc);
  c.expect(std::abs(rows[1].n_components - 12) <= 2, "80% selects " + std::to_string(rows[1].n_components));
  c.expect(std::abs(rows[2].n_components - 19) <= 2, "90% selects " + std::to_string(rows[2].n_components));
  c.expect(rows[2].accuracy >= rows[0].accuracy, "sweep accuracy at 90% below 50%");
  s << ", comps 80%=" << rows[1].n_components << " 90%=" << rows[2].n_components;

  dosml::CompareConfig cc;
  cc.variance_target = 0.90;
  dosml::ModelSpec dt;
  dt.seed = 42;
  dt.threads = threads;
  dosml::ModelSpec rf = dt;
  rf.family = dosml::Family::rf;
  cc.specs = {dt, rf};
  const auto cmp = dosml::compare_models(split.train, split.test, cc);
  const auto& dt_pca = cmp.with_pca[0].report;
  const auto& rf_raw = cmp.without_pca[1].report;
  c.expect(dt_pca.accuracy >= 0.99, "DT with PCA(90%) accuracy " + std::to_string(dt_pca.accuracy));
  c.expect(dt_pca.fpr_benign <= 0.005, "DT with PCA(90%) FPR " + std::to_string(dt_pca.fpr_benign));
  c.expect(rf_raw.fpr_benign <= 0.002, "RF without PCA FPR " + std::to_string(rf_raw.fpr_benign));
  s << ", DT+PCA acc " << dt_pca.accuracy << " fpr " << dt_pca.fpr_benign << ", RF fpr " << rf_raw.fpr_benign;

  const auto m = dosml::fit(dt, split.train.X, split.train.y, ds.n_classes());
  const auto imp = dosml::gini_importance(m, split.train.feature_names);
  c.expect(imp.entries.front().first == "flag_rst", "top DT feature is " + imp.entries.front().first);
  s << ", top feature " << imp.entries.front().first;
  c.fill(r, s.str());
}

// Tabular outputs: CSVs, plus the packet fixtures synth-flows writes.
std::map<std::string, std::string> table_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto ext = e.path().extension();
    if (ext == ".csv" || ext == ".fixture") out[e.path().filename().string()] = dosml::read_file(e.path().string());
  }
  return out;
}

void determinism(Result& r, const Options& opt) {
  Checker c;
  fs::path root = opt.work_dir.empty()
                      ? fs::temp_directory_path() / ("dosml-accept-" + std::to_string(::getpid()))
                      : fs::path(opt.work_dir);
  fs::remove_all(root);
  std::ostringstream sink;
  std::size_t compared = 0;

  auto run_twice = [&](const std::string& command, const std::map<std::string, std::string>& settings) {
    const auto* info = &*std::find_if(dosml::cli::commands().begin(), dosml::cli::commands().end(),
                                      [&](const auto& ci) { return ci.name == command; });
    std::map<std::string, std::string> outputs[2];
    for (int rep = 0; rep < 2; ++rep) {
      dosml::RunConfig cfg;
      for (const auto& [k, v] : settings) cfg.set(k, v);
      const fs::path out = root / (command + "-" + std::to_string(rep));
      cfg.set("output", out.string());
      cfg.set("threads", std::to_string(opt.threads));
      const int rc = info->fn(cfg, sink);
      c.expect(rc == 0, command + " exited " + std::to_string(rc));
      outputs[rep] = table_files(out);
    }
    c.expect(!outputs[0].empty(), command + " wrote no tables");
    c.expect(outputs[0] == outputs[1], command + " tables differ between reruns");
    compared += outputs[0].size();
  };

  run_twice("synth-blobs", {{"blobs_classes", "4"}, {"blobs_d", "8"}, {"blobs_informative", "3"},
                            {"blobs_n_per_class", "150"}, {"blobs_separation", "6"}, {"seed", "11"}});
  const std::string blobs = (root / "synth-blobs-0" / "blobs.csv").string();
  run_twice("synth-flows", {{"seed", "3"}});
  run_twice("extract", {{"input", (root / "synth-flows-0" / "rst_suppression.fixture").string()}});
  run_twice("split", {{"input", blobs}, {"schema", "open"}, {"seed", "5"}});
  run_twice("sweep", {{"input", blobs}, {"schema", "open"}, {"seed", "5"}, {"variance_targets", "0.5,0.8,0.95"}, {"folds", "3"}});
  run_twice("compare", {{"input", blobs}, {"schema", "open"}, {"seed", "5"}, {"n_trees", "10"}, {"svm_epochs", "5"}});
  run_twice("importance", {{"input", blobs}, {"schema", "open"}, {"seed", "5"}, {"importance_top", "3"}});
  run_twice("pca-report", {{"input", blobs}, {"schema", "open"}, {"seed", "5"}});
  run_twice("pipeline", {{"input", blobs}, {"schema", "open"}, {"seed", "5"}, {"n_trees", "10"}, {"svm_epochs", "5"},
                         {"variance_targets", "0.6,0.9"}, {"folds", "3"}});
  if (opt.work_dir.empty()) fs::remove_all(root);
  c.fill(r, std::to_string(compared) + " table files compared across 9 commands");
}

const char* name_of(int id) {
  switch (id) {
    case 1: return "flow_semantics";
    case 2: return "pca_algebra";
    case 3: return "classifier_oracles";
    case 4: return "metric_identities";
    case 5: return "synthetic_end_to_end";
    case 6: return "lycos_reproduction";
    case 7: return "determinism";
  }
  return "unknown";
}

double budget_of(int id) {
  switch (id) {
    case 1: return 5;
    case 2: return 10;
    case 3: return 30;
    case 5: return 120;
  }
  return 0;
}

}  // namespace

Result criterion(int id, const Options& opt) {
  Result r;
  r.id = id;
  r.name = name_of(id);
  r.budget_s = budget_of(id);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (id) {
      case 1: flow_semantics(r); break;
      case 2: pca_algebra(r); break;
      case 3: classifier_oracles(r); break;
      case 4: metric_identities(r); break;
      case 5: synthetic_end_to_end(r, opt.threads); break;
      case 6: lycos(r, opt.lycos_dir, opt.threads); break;
      case 7: determinism(r, opt); break;
      default:
        r.status = Status::fail;
        r.detail = "no such criterion";
    }
  } catch (const std::exception& e) {
    r.status = Status::fail;
    r.detail = std::string("exception: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.status == Status::pass && r.budget_s > 0 && r.seconds > r.budget_s) {
    r.status = Status::fail;
    r.detail += "; over the " + std::to_string(static_cast<int>(r.budget_s)) + " s budget";
  }
  return r;
}

std::vector<Result> run_all(const Options& opt, std::ostream* progress) {
  std::vector<Result> out;
  for (int id = 1; id <= 7; ++id) {
    if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
    out.push_back(criterion(id, opt));
    if (progress) *progress << format(out.back()) << std::endl;
  }
  return out;
}

std::string format(const Result& r) {
  const char* status = r.status == Status::pass ? "PASS" : r.status == Status::fail ? "FAIL" : "SKIP";
  char secs[32];
  std::snprintf(secs, sizeof secs, "%.2f", r.seconds);
  return "criterion " + std::to_string(r.id) + " " + r.name + ": " + status + " (" + secs + " s) " + r.detail;
}

bool all_passed(const std::vector<Result>& results) {
  return std::none_of(results.begin(), results.end(), [](const Result& r) { return r.status == Status::fail; });
}

}  // namespace acceptance
