#include "dosml/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iomanip>
#include <limits>
#include <map>
#include <sstream>

#include "dosml/io.hpp"
#include "parallel.hpp"

namespace dosml {

namespace {

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::string seconds(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

std::string target_label(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", 100.0 * t);
  return buf;
}

std::string pad(const std::string& s, std::size_t w) {
  return s.size() >= w ? s : std::string(w - s.size(), ' ') + s;
}

std::string render_table(const std::vector<std::vector<std::string>>& rows) {
  if (rows.empty()) return {};
  std::vector<std::size_t> width(rows.front().size(), 0);
  for (const auto& r : rows) {
    for (std::size_t j = 0; j < r.size(); ++j) width[j] = std::max(width[j], r[j].size());
  }
  std::ostringstream out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < rows[i].size(); ++j) out << (j ? "  " : "") << pad(rows[i][j], width[j]);
    out << '\n';
    if (i == 0) {
      std::size_t total = 0;
      for (auto w : width) total += w;
      out << std::string(total + 2 * (width.size() - 1), '-') << '\n';
    }
  }
  return out.str();
}

}  // namespace

EvalReport evaluate_predictions(std::span<const int> truth, std::span<const int> pred, int n_classes,
                                std::vector<std::string> class_names) {
  if (truth.empty()) throw Error("cannot evaluate an empty test set");
  if (truth.size() != pred.size()) throw DimensionError("truth and prediction lengths differ");
  if (n_classes < 1) throw DimensionError("need at least one class");
  if (class_names.empty()) {
    for (int k = 0; k < n_classes; ++k) class_names.push_back(std::to_string(k));
  }
  if (static_cast<int>(class_names.size()) != n_classes) throw DimensionError("class name count differs");

  const auto C = static_cast<std::size_t>(n_classes);
  EvalReport r;
  r.class_names = std::move(class_names);
  r.n = truth.size();
  r.confusion.assign(C, std::vector<std::size_t>(C, 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (truth[i] < 0 || truth[i] >= n_classes || pred[i] < 0 || pred[i] >= n_classes) {
      throw DimensionError("label out of range at row " + std::to_string(i));
    }
    ++r.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(pred[i])];
  }

  std::size_t tp_total = 0;
  double wp = 0, wf = 0;
  for (std::size_t k = 0; k < C; ++k) {
    ClassMetrics m;
    m.name = r.class_names[k];
    const std::size_t tp = r.confusion[k][k];
    for (std::size_t j = 0; j < C; ++j) {
      m.support += r.confusion[k][j];
      m.predicted += r.confusion[j][k];
    }
    if (m.predicted > 0) m.precision = static_cast<double>(tp) / static_cast<double>(m.predicted);
    else m.precision_undefined = true;
    if (m.support > 0) m.recall = static_cast<double>(tp) / static_cast<double>(m.support);
    else m.recall_undefined = true;
    if (m.precision + m.recall > 0) m.f1 = 2 * m.precision * m.recall / (m.precision + m.recall);
    else m.f1_undefined = true;
    tp_total += tp;
    wp += static_cast<double>(m.support) * m.precision;
    wf += static_cast<double>(m.support) * m.f1;
    r.per_class.push_back(std::move(m));
  }
  const double n = static_cast<double>(r.n);
  r.accuracy = static_cast<double>(tp_total) / n;
  // sum_k support_k * (TP_k / support_k) / N collapses to sum_k TP_k / N.
  r.weighted_recall = static_cast<double>(tp_total) / n;
  r.weighted_precision = wp / n;
  r.weighted_f1 = wf / n;

  const std::size_t benign = r.per_class[0].support;
  if (benign > 0) {
    r.fpr_defined = true;
    r.fpr_benign = static_cast<double>(benign - r.confusion[0][0]) / static_cast<double>(benign);
  }
  return r;
}

EvalReport evaluate(const TrainedModel& model, const Dataset& test) {
  if (test.rows() == 0) throw Error("cannot evaluate an empty test set");
  if (model.n_classes < test.n_classes()) throw DimensionError("test set has more classes than the model");
  double infer = 0;
  const auto pred = model.predict(test.X, &infer);
  auto names = test.class_names;
  for (int k = static_cast<int>(names.size()); k < model.n_classes; ++k) names.push_back(std::to_string(k));
  auto r = evaluate_predictions(test.y, pred, model.n_classes, std::move(names));
  r.train_time_s = model.train_time_s;
  r.infer_time_s = infer;
  return r;
}

nlohmann::json EvalReport::to_json() const {
  nlohmann::json classes = nlohmann::json::array();
  for (const auto& m : per_class) {
    classes.push_back({{"name", m.name},
                       {"precision", m.precision},
                       {"recall", m.recall},
                       {"f1", m.f1},
                       {"support", m.support},
                       {"predicted", m.predicted},
                       {"precision_undefined", m.precision_undefined},
                       {"recall_undefined", m.recall_undefined},
                       {"f1_undefined", m.f1_undefined}});
  }
  return {{"n", n},
          {"accuracy", accuracy},
          {"weighted_precision", weighted_precision},
          {"weighted_recall", weighted_recall},
          {"weighted_f1", weighted_f1},
          {"fpr_benign", fpr_defined ? nlohmann::json(fpr_benign) : nlohmann::json(nullptr)},
          {"train_time_s", train_time_s},
          {"infer_time_s", infer_time_s},
          {"class_names", class_names},
          {"confusion", confusion},
          {"per_class", classes}};
}

std::string EvalReport::per_class_csv() const {
  std::ostringstream out;
  out << "class,precision,recall,f1,support,flags\n";
  for (const auto& m : per_class) {
    std::string flags;
    auto add = [&](bool on, const char* name) {
      if (!on) return;
      if (!flags.empty()) flags += ';';
      flags += name;
    };
    add(m.precision_undefined, "precision_undefined");
    add(m.recall_undefined, "recall_undefined");
    add(m.f1_undefined, "f1_undefined");
    out << m.name << ',' << pct(m.precision) << ',' << pct(m.recall) << ',' << pct(m.f1) << ',' << m.support << ','
        << flags << '\n';
  }
  return out.str();
}

std::string EvalReport::confusion_csv() const {
  std::ostringstream out;
  out << "truth";
  for (const auto& c : class_names) out << ',' << c;
  out << '\n';
  for (std::size_t i = 0; i < confusion.size(); ++i) {
    out << class_names[i];
    for (auto v : confusion[i]) out << ',' << v;
    out << '\n';
  }
  return out.str();
}

std::string EvalReport::to_text() const {
  std::vector<std::vector<std::string>> rows{{"class", "P", "R", "F1", "support"}};
  for (const auto& m : per_class) {
    rows.push_back({m.name, pct(m.precision), pct(m.recall), pct(m.f1), std::to_string(m.support)});
  }
  std::ostringstream out;
  out << render_table(rows);
  out << "accuracy " << pct(accuracy) << "  weighted P " << pct(weighted_precision) << "  R " << pct(weighted_recall)
      << "  F1 " << pct(weighted_f1) << "  FPR " << (fpr_defined ? pct(fpr_benign) : std::string("n/a")) << '\n';
  return out.str();
}

// ---------------------------------------------------------------------------

namespace {

struct FoldResult {
  std::vector<int> components;  // per target
  std::vector<EvalReport> reports;
};

}  // namespace

std::vector<SweepRow> variance_sweep(const Dataset& train, const SweepConfig& config) {
  if (config.targets.empty()) throw ConfigError("variance sweep needs at least one target");
  for (double t : config.targets) {
    if (!(t > 0 && t <= 1)) throw ConfigError("variance target " + format_exact(t) + " outside (0, 1]");
  }
  config.model.validate();
  const auto folds = stratified_kfold(train.y, train.n_classes(), config.folds, config.seed);
  const std::size_t T = config.targets.size();

  std::vector<FoldResult> results(folds.size());
  detail::parallel_for(folds.size(), config.threads, [&](std::size_t f) {
    const Dataset fit_part = train.subset(folds[f].train);
    const Dataset val_part = train.subset(folds[f].validate);
    const Scaler scaler = Scaler::fit(fit_part.X);
    const Matrix Xf = scaler.apply(fit_part.X);
    const Matrix Xv = scaler.apply(val_part.X);
    const PcaModel pca = pca_fit(Xf, fit_part.feature_names);
    FoldResult& out = results[f];
    for (std::size_t t = 0; t < T; ++t) {
      const int k = select_components(pca, config.targets[t]);
      const Matrix Zf = pca_transform(pca, Xf, k);
      const Matrix Zv = pca_transform(pca, Xv, k);
      ModelSpec spec = config.model;
      spec.threads = 1;
      const TrainedModel m = fit(spec, Zf, fit_part.y, train.n_classes());
      double infer = 0;
      const auto pred = m.predict(Zv, &infer);
      auto rep = evaluate_predictions(val_part.y, pred, train.n_classes(), train.class_names);
      rep.train_time_s = m.train_time_s;
      rep.infer_time_s = infer;
      out.components.push_back(k);
      out.reports.push_back(std::move(rep));
    }
  });

  const Scaler full_scaler = Scaler::fit(train.X);
  const PcaModel full_pca = pca_fit(full_scaler.apply(train.X), train.feature_names);

  std::vector<SweepRow> rows;
  for (std::size_t t = 0; t < T; ++t) {
    SweepRow row;
    row.target = config.targets[t];
    row.n_components = select_components(full_pca, row.target);
    row.fold_components_min = std::numeric_limits<int>::max();
    double fpr_sum = 0;
    int fpr_count = 0;
    for (const auto& fr : results) {
      const auto& rep = fr.reports[t];
      const int k = fr.components[t];
      row.fold_components_mean += k;
      row.fold_components_min = std::min(row.fold_components_min, k);
      row.fold_components_max = std::max(row.fold_components_max, k);
      row.train_time_s += rep.train_time_s;
      row.infer_time_s += rep.infer_time_s;
      row.accuracy += rep.accuracy;
      row.precision += rep.weighted_precision;
      row.recall += rep.weighted_recall;
      row.f1 += rep.weighted_f1;
      if (rep.fpr_defined) {
        fpr_sum += rep.fpr_benign;
        ++fpr_count;
      }
    }
    const double nf = static_cast<double>(results.size());
    row.fold_components_mean /= nf;
    row.accuracy /= nf;
    row.precision /= nf;
    row.recall /= nf;
    row.f1 /= nf;
    row.fpr_defined = fpr_count > 0;
    row.fpr = fpr_count > 0 ? fpr_sum / fpr_count : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::string sweep_csv(const std::vector<SweepRow>& rows, bool with_timing) {
  std::ostringstream out;
  out << "variance_pct,n_components,fold_components_mean,fold_components_min,fold_components_max";
  if (with_timing) out << ",train_time_s,infer_time_s,total_time_s";
  out << ",accuracy,precision,recall,f1,fpr\n";
  for (const auto& r : rows) {
    out << target_label(r.target) << ',' << r.n_components << ',' << format_number(r.fold_components_mean) << ','
        << r.fold_components_min << ',' << r.fold_components_max;
    if (with_timing) {
      out << ',' << seconds(r.train_time_s) << ',' << seconds(r.infer_time_s) << ','
          << seconds(r.train_time_s + r.infer_time_s);
    }
    out << ',' << pct(r.accuracy) << ',' << pct(r.precision) << ',' << pct(r.recall) << ',' << pct(r.f1) << ','
        << (r.fpr_defined ? pct(r.fpr) : std::string("nan")) << '\n';
  }
  return out.str();
}

std::string sweep_text(const std::vector<SweepRow>& rows) {
  std::vector<std::vector<std::string>> t{{"variance %", "components", "T+I (s)", "train", "infer", "A", "P", "R",
                                           "F1", "FPR"}};
  for (const auto& r : rows) {
    t.push_back({target_label(r.target), std::to_string(r.n_components), seconds(r.train_time_s + r.infer_time_s),
                 seconds(r.train_time_s), seconds(r.infer_time_s), pct(r.accuracy), pct(r.precision),
                 pct(r.recall), pct(r.f1), r.fpr_defined ? pct(r.fpr) : "n/a"});
  }
  return render_table(t);
}

nlohmann::json sweep_json(const std::vector<SweepRow>& rows) {
  nlohmann::json a = nlohmann::json::array();
  for (const auto& r : rows) {
    a.push_back({{"target", r.target},
                 {"n_components", r.n_components},
                 {"fold_components_mean", r.fold_components_mean},
                 {"fold_components_min", r.fold_components_min},
                 {"fold_components_max", r.fold_components_max},
                 {"train_time_s", r.train_time_s},
                 {"infer_time_s", r.infer_time_s},
                 {"total_time_s", r.train_time_s + r.infer_time_s},
                 {"accuracy", r.accuracy},
                 {"precision", r.precision},
                 {"recall", r.recall},
                 {"f1", r.f1},
                 {"fpr", r.fpr_defined ? nlohmann::json(r.fpr) : nlohmann::json(nullptr)}});
  }
  return a;
}

// ---------------------------------------------------------------------------

CompareResult compare_models(const Dataset& train, const Dataset& test, const CompareConfig& config) {
  if (config.specs.empty()) throw ConfigError("compare needs at least one model spec");
  if (!(config.variance_target > 0 && config.variance_target <= 1)) {
    throw ConfigError("variance target outside (0, 1]");
  }
  if (train.cols() != test.cols()) throw DimensionError("train and test widths differ");
  CompareResult r;
  r.scaler = Scaler::fit(train.X);
  const Matrix Xtr = r.scaler.apply(train.X);
  const Matrix Xte = r.scaler.apply(test.X);
  r.pca = pca_fit(Xtr, train.feature_names);
  r.n_components = select_components(r.pca, config.variance_target);
  const Matrix Ztr = pca_transform(r.pca, Xtr, r.n_components);
  const Matrix Zte = pca_transform(r.pca, Xte, r.n_components);

  auto run = [&](const ModelSpec& spec, const Matrix& A, const Matrix& B, bool with_pca) {
    const TrainedModel m = fit(spec, A, train.y, train.n_classes());
    double infer = 0;
    const auto pred = m.predict(B, &infer);
    CompareRow row;
    row.family = spec.family;
    row.with_pca = with_pca;
    row.n_components = static_cast<int>(A.cols());
    row.report = evaluate_predictions(test.y, pred, train.n_classes(), train.class_names);
    row.report.train_time_s = m.train_time_s;
    row.report.infer_time_s = infer;
    return row;
  };
  for (const auto& spec : config.specs) {
    r.with_pca.push_back(run(spec, Ztr, Zte, true));
    r.without_pca.push_back(run(spec, Xtr, Xte, false));
  }
  return r;
}

std::string compare_csv(const std::vector<CompareRow>& rows, bool with_timing) {
  std::ostringstream out;
  out << "model,pca,n_inputs,precision,recall,f1,accuracy,fpr";
  if (with_timing) out << ",train_time_s,infer_time_s";
  out << '\n';
  for (const auto& r : rows) {
    const auto& e = r.report;
    out << to_string(r.family) << ',' << (r.with_pca ? "yes" : "no") << ',' << r.n_components << ','
        << pct(e.weighted_precision) << ',' << pct(e.weighted_recall) << ',' << pct(e.weighted_f1) << ','
        << pct(e.accuracy) << ',' << (e.fpr_defined ? pct(e.fpr_benign) : std::string("nan"));
    if (with_timing) out << ',' << seconds(e.train_time_s) << ',' << seconds(e.infer_time_s);
    out << '\n';
  }
  return out.str();
}

std::string compare_text(const std::vector<CompareRow>& rows) {
  std::vector<std::vector<std::string>> t{{"model", "P", "R", "F1", "FPR", "TT (s)", "IT (s)"}};
  for (const auto& r : rows) {
    const auto& e = r.report;
    t.push_back({std::string(to_string(r.family)), pct(e.weighted_precision), pct(e.weighted_recall),
                 pct(e.weighted_f1), e.fpr_defined ? pct(e.fpr_benign) : "n/a", seconds(e.train_time_s),
                 seconds(e.infer_time_s)});
  }
  return render_table(t);
}

nlohmann::json compare_json(const CompareResult& r) {
  auto arm = [](const std::vector<CompareRow>& rows) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& row : rows) {
      a.push_back({{"model", std::string(to_string(row.family))},
                   {"n_inputs", row.n_components},
                   {"report", row.report.to_json()}});
    }
    return a;
  };
  return {{"n_components", r.n_components}, {"with_pca", arm(r.with_pca)}, {"without_pca", arm(r.without_pca)}};
}

// ---------------------------------------------------------------------------

RefitResult refit_on_top_features(const Dataset& train, const Dataset& test, const ImportanceReport& importance,
                                  std::size_t n_top, const ModelSpec& spec) {
  if (n_top == 0 || n_top > train.cols()) {
    throw ConfigError("n_top must be in [1, " + std::to_string(train.cols()) + "]");
  }
  if (importance.entries.size() < n_top) throw ConfigError("importance report has fewer entries than n_top");
  std::map<std::string, std::size_t> index;
  for (std::size_t j = 0; j < train.feature_names.size(); ++j) index[train.feature_names[j]] = j;
  std::vector<std::size_t> cols;
  RefitResult out;
  for (std::size_t i = 0; i < n_top; ++i) {
    const auto& name = importance.entries[i].first;
    auto it = index.find(name);
    if (it == index.end()) throw SchemaError("importance feature '" + name + "' not in the dataset");
    cols.push_back(it->second);
    out.columns.push_back(name);
  }
  const Dataset tr = train.select_columns(cols);
  const Dataset te = test.select_columns(cols);
  out.model = fit(spec, tr.X, tr.y, train.n_classes());
  out.report = evaluate(out.model, te);
  return out;
}

}  // namespace dosml
