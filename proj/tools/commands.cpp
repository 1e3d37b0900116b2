#include "commands.hpp"

#include <algorithm>
#include <filesystem>
#include <sstream>

#include "dosml/classifiers.hpp"
#include "dosml/dataset.hpp"
#include "dosml/evaluation.hpp"
#include "dosml/features.hpp"
#include "dosml/flow_table.hpp"
#include "dosml/io.hpp"
#include "dosml/packet.hpp"
#include "dosml/pca.hpp"
#include "dosml/synth.hpp"

namespace dosml::cli {

namespace fs = std::filesystem;

namespace {

std::string out_path(const RunConfig& cfg, const std::string& name) {
  return (fs::path(cfg.get("output")) / name).string();
}

void emit(const RunConfig& cfg, const std::string& name, std::string_view content, std::ostream& log) {
  const auto path = out_path(cfg, name);
  write_file_atomic(path, content);
  log << "wrote " << path << '\n';
}

void echo_config(const RunConfig& cfg, const std::string& command, std::ostream& log) {
  emit(cfg, "resolved_" + command + ".conf", cfg.serialize(command), log);
}

const std::string& require_input(const RunConfig& cfg) {
  const auto& in = cfg.get("input");
  if (in.empty()) throw ConfigError("no input given (use --input or input=...)");
  return in;
}

std::string lowercase(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

// Threshold checks shared by every command that reports a model.
struct Thresholds {
  std::optional<double> min_accuracy;
  std::optional<double> max_fpr;
  bool violated = false;

  explicit Thresholds(const RunConfig& cfg)
      : min_accuracy(cfg.get_optional_double("min_accuracy")), max_fpr(cfg.get_optional_double("max_fpr")) {}

  void check(const std::string& what, double accuracy, bool fpr_defined, double fpr, std::ostream& log) {
    if (min_accuracy && accuracy < *min_accuracy) {
      log << "threshold violated: " << what << " accuracy " << accuracy << " < " << *min_accuracy << '\n';
      violated = true;
    }
    if (max_fpr && fpr_defined && fpr > *max_fpr) {
      log << "threshold violated: " << what << " fpr " << fpr << " > " << *max_fpr << '\n';
      violated = true;
    }
  }
  int exit_code() const { return violated ? kExitAcceptance : kExitOk; }
};

Split prepare(const RunConfig& cfg, std::ostream& log) {
  const Dataset raw = load_csv_path(require_input(cfg), cfg.csv_schema());
  const Dataset ds = drop_excluded(raw, cfg.excluded_columns());
  for (const auto& p : ds.provenance) log << "  " << p << '\n';
  log << "dataset: " << ds.rows() << " rows, " << ds.cols() << " features, " << ds.n_classes() << " classes\n";
  return stratified_split(ds, cfg.split_fractions(), cfg.get_u64("seed"));
}

int run_sweep(const RunConfig& cfg, const Split& split, std::ostream& log) {
  const auto rows = variance_sweep(split.train, cfg.sweep_config());
  emit(cfg, "sweep.csv", sweep_csv(rows, cfg.get_bool("csv_timing")), log);
  emit(cfg, "sweep.json", sweep_json(rows).dump(2) + "\n", log);
  log << sweep_text(rows);
  Thresholds th(cfg);
  for (const auto& r : rows) {
    th.check("sweep target " + format_number(r.target), r.accuracy, r.fpr_defined, r.fpr, log);
  }
  return th.exit_code();
}

int run_compare(const RunConfig& cfg, const Split& split, std::ostream& log) {
  const auto cc = cfg.compare_config();
  const auto result = compare_models(split.train, split.test, cc);
  const bool timing = cfg.get_bool("csv_timing");
  emit(cfg, "compare_with_pca.csv", compare_csv(result.with_pca, timing), log);
  emit(cfg, "compare_without_pca.csv", compare_csv(result.without_pca, timing), log);
  emit(cfg, "compare.json", compare_json(result).dump(2) + "\n", log);
  log << "with PCA (" << result.n_components << " components, target " << format_number(cc.variance_target)
      << ")\n"
      << compare_text(result.with_pca) << "without PCA\n"
      << compare_text(result.without_pca);

  const Family breakdown = parse_family(cfg.get("breakdown_model"));
  for (const auto* arm : {&result.with_pca, &result.without_pca}) {
    for (const auto& row : *arm) {
      if (row.family != breakdown) continue;
      const std::string tag = lowercase(std::string(to_string(row.family))) + (row.with_pca ? "_pca" : "_nopca");
      emit(cfg, "per_class_" + tag + ".csv", row.report.per_class_csv(), log);
      emit(cfg, "confusion_" + tag + ".csv", row.report.confusion_csv(), log);
    }
  }
  Thresholds th(cfg);
  for (const auto* arm : {&result.with_pca, &result.without_pca}) {
    for (const auto& row : *arm) {
      th.check(std::string(to_string(row.family)) + (row.with_pca ? " with PCA" : " without PCA"),
               row.report.accuracy, row.report.fpr_defined, row.report.fpr_benign, log);
    }
  }
  return th.exit_code();
}

int run_importance(const RunConfig& cfg, const Split& split, std::ostream& log) {
  const ModelSpec spec = cfg.model_spec(Family::dt);
  const TrainedModel dt = fit(spec, split.train.X, split.train.y, split.train.n_classes());
  const auto report = gini_importance(dt, split.train.feature_names);
  emit(cfg, "importance.csv", report.to_csv(), log);
  emit(cfg, "dt_model.json", save_model(dt).dump() + "\n", log);
  log << "top features by DT importance:\n";
  for (std::size_t i = 0; i < std::min<std::size_t>(10, report.entries.size()); ++i) {
    log << "  " << (i + 1) << ") " << report.entries[i].first << "  " << format_number(report.entries[i].second)
        << '\n';
  }

  const auto n_top = static_cast<std::size_t>(std::max<long long>(1, cfg.get_int("importance_top")));
  const auto refit = refit_on_top_features(split.train, split.test, report, std::min(n_top, split.train.cols()), spec);
  std::ostringstream summary;
  summary << "n_top,features,accuracy,precision,recall,f1,fpr\n";
  std::string joined;
  for (const auto& c : refit.columns) joined += (joined.empty() ? "" : ";") + c;
  const auto& r = refit.report;
  summary << refit.columns.size() << ',' << joined << ',' << format_number(100 * r.accuracy) << ','
          << format_number(100 * r.weighted_precision) << ',' << format_number(100 * r.weighted_recall) << ','
          << format_number(100 * r.weighted_f1) << ',' << (r.fpr_defined ? format_number(100 * r.fpr_benign) : "nan")
          << '\n';
  emit(cfg, "refit_top_features.csv", summary.str(), log);
  emit(cfg, "refit_per_class.csv", r.per_class_csv(), log);
  emit(cfg, "refit_report.json", r.to_json().dump(2) + "\n", log);
  log << "refit on top " << refit.columns.size() << " features:\n" << r.to_text();
  Thresholds th(cfg);
  th.check("DT refit on top features", r.accuracy, r.fpr_defined, r.fpr_benign, log);
  return th.exit_code();
}

int run_pca_report(const RunConfig& cfg, const Split& split, std::ostream& log) {
  const Scaler scaler = Scaler::fit(split.train.X);
  const PcaModel pca = pca_fit(scaler.apply(split.train.X), split.train.feature_names);
  const auto scree = scree_report(pca);
  const int top_m = static_cast<int>(std::min<long long>(cfg.get_int("loadings_top"), pca.dims()));
  emit(cfg, "scree.csv", scree_csv(scree), log);
  emit(cfg, "loadings.csv", loadings_csv(loadings_report(pca, top_m)), log);
  emit(cfg, "pca_model.json", pca.to_json().dump() + "\n", log);
  emit(cfg, "scaler.json", scaler.to_json().dump() + "\n", log);
  for (double t : cfg.get_double_list("variance_targets")) {
    log << "variance " << format_number(100 * t) << "% -> " << select_components(pca, t) << " components\n";
  }
  if (top_m > 0) {
    log << "first " << top_m << " components explain "
        << format_number(100 * scree[static_cast<std::size_t>(top_m - 1)].cumulative) << "% of the variance\n";
  }
  return kExitOk;
}

bool looks_like_pcap(const std::string& bytes) {
  if (bytes.size() < 4) return false;
  const auto b = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::uint32_t le = b[0] | (b[1] << 8) | (b[2] << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
  return le == 0xA1B2C3D4u || le == 0xA1B23C4Du || le == 0xD4C3B2A1u || le == 0x4D3CB2A1u;
}

}  // namespace

int cmd_extract(const RunConfig& cfg, std::ostream& log) {
  const auto& input = require_input(cfg);
  const std::string bytes = read_file(input);
  std::vector<PacketRecord> packets;
  nlohmann::json summary;
  if (looks_like_pcap(bytes)) {
    auto pr = parse_pcap(std::span(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
    summary["pcap_records"] = pr.total_records;
    summary["skipped_non_ipv4"] = pr.skipped_non_ipv4;
    summary["skipped_protocol"] = pr.skipped_protocol;
    summary["skipped_fragment"] = pr.skipped_fragment;
    summary["skipped_malformed"] = pr.skipped_malformed;
    packets = std::move(pr.packets);
  } else {
    packets = parse_fixture(bytes);
  }
  const auto ex = extract_flows(packets, cfg.flow_config());
  const auto fc = cfg.feature_config();
  std::ostringstream csv;
  write_feature_csv_header(csv);
  for (const auto& f : ex.flows) write_feature_csv_row(csv, finalize(f.flow, fc, cfg.get("label")));

  const auto& c = ex.counters;
  summary["packets_in"] = c.packets_in;
  summary["packets_assigned"] = c.packets_assigned;
  summary["dropped_terminated"] = c.dropped_terminated;
  summary["flows"] = ex.flows.size();
  summary["schema"] = std::string(kFeatureSchemaVersion);
  echo_config(cfg, "extract", log);
  emit(cfg, "flows.csv", csv.str(), log);
  emit(cfg, "extract_summary.json", summary.dump(2) + "\n", log);
  log << "packets_in=" << c.packets_in << " assigned=" << c.packets_assigned << " dropped=" << c.dropped_terminated
      << " flows=" << ex.flows.size() << '\n';
  return kExitOk;
}

int cmd_split(const RunConfig& cfg, std::ostream& log) {
  const Dataset ds = load_csv_path(require_input(cfg), cfg.csv_schema());
  const auto f = cfg.split_fractions();
  const auto seed = cfg.get_u64("seed");
  const Split s = stratified_split(ds, f, seed);
  echo_config(cfg, "split", log);
  for (const auto& [name, part] : {std::pair{"train", &s.train}, std::pair{"validate", &s.validate},
                                   std::pair{"test", &s.test}}) {
    std::ostringstream out;
    write_csv(out, *part);
    emit(cfg, std::string(name) + ".csv", out.str(), log);
  }
  std::ostringstream counts;
  counts << "class,total,train,validate,test\n";
  const auto total = ds.class_counts(), tr = s.train.class_counts(), va = s.validate.class_counts(),
             te = s.test.class_counts();
  for (std::size_t k = 0; k < total.size(); ++k) {
    counts << ds.class_names[k] << ',' << total[k] << ',' << tr[k] << ',' << va[k] << ',' << te[k] << '\n';
  }
  emit(cfg, "split_counts.csv", counts.str(), log);
  emit(cfg, "split_manifest.json", split_manifest(ds, s.indices, f, seed).dump(2) + "\n", log);
  log << counts.str();
  return kExitOk;
}

int cmd_sweep(const RunConfig& cfg, std::ostream& log) {
  const Split s = prepare(cfg, log);
  echo_config(cfg, "sweep", log);
  return run_sweep(cfg, s, log);
}

int cmd_compare(const RunConfig& cfg, std::ostream& log) {
  const Split s = prepare(cfg, log);
  echo_config(cfg, "compare", log);
  return run_compare(cfg, s, log);
}

int cmd_importance(const RunConfig& cfg, std::ostream& log) {
  const Split s = prepare(cfg, log);
  echo_config(cfg, "importance", log);
  return run_importance(cfg, s, log);
}

int cmd_pca_report(const RunConfig& cfg, std::ostream& log) {
  const Split s = prepare(cfg, log);
  echo_config(cfg, "pca-report", log);
  return run_pca_report(cfg, s, log);
}

int cmd_synth_blobs(const RunConfig& cfg, std::ostream& log) {
  const Dataset ds = gen_blobs(cfg.blob_spec());
  std::ostringstream out;
  write_csv(out, ds);
  echo_config(cfg, "synth-blobs", log);
  emit(cfg, "blobs.csv", out.str(), log);
  log << ds.rows() << " rows, " << ds.cols() << " features, " << ds.n_classes() << " classes\n";
  return kExitOk;
}

int cmd_synth_flows(const RunConfig& cfg, std::ostream& log) {
  std::vector<std::string> names;
  if (cfg.get("scenario") == "all") names = scenario_catalog();
  else names = cfg.get_list("scenario");
  const auto seed = cfg.get_u64("seed");
  echo_config(cfg, "synth-flows", log);
  for (const auto& n : names) {
    const auto sc = gen_flow_scenario(n, seed);
    emit(cfg, n + ".fixture", sc.fixture_text(), log);
    emit(cfg, n + ".manifest.json", sc.manifest.dump(2) + "\n", log);
  }
  return kExitOk;
}

int cmd_pipeline(const RunConfig& cfg, std::ostream& log) {
  const Split s = prepare(cfg, log);
  echo_config(cfg, "pipeline", log);
  int code = kExitOk;
  for (const auto& step : cfg.get_list("pipeline_steps")) {
    log << "== " << step << '\n';
    int rc = kExitOk;
    if (step == "sweep") rc = run_sweep(cfg, s, log);
    else if (step == "compare") rc = run_compare(cfg, s, log);
    else if (step == "importance") rc = run_importance(cfg, s, log);
    else if (step == "pca" || step == "pca-report") rc = run_pca_report(cfg, s, log);
    else throw ConfigError("unknown pipeline step '" + step + "'");
    code = std::max(code, rc);
  }
  return code;
}

const std::vector<CommandInfo>& commands() {
  static const std::vector<CommandInfo> c{
      {"extract", "packets (pcap or fixture) to a flow feature CSV", cmd_extract},
      {"split", "stratified train/validate/test split with class counts", cmd_split},
      {"sweep", "PCA variance-target sweep with k-fold cross-validation", cmd_sweep},
      {"compare", "every model family with and without PCA", cmd_compare},
      {"importance", "DT Gini importance and a refit on the top features", cmd_importance},
      {"pca-report", "scree, cumulative variance and loadings", cmd_pca_report},
      {"synth-blobs", "seeded Gaussian class clusters as a dataset CSV", cmd_synth_blobs},
      {"synth-flows", "packet fixtures for the flow scenario catalog", cmd_synth_flows},
      {"pipeline", "load, split once, then run the configured steps", cmd_pipeline},
  };
  return c;
}

}  // namespace dosml::cli
