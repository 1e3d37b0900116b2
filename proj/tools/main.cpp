#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "commands.hpp"
#include "criteria.hpp"
#include "dosml/config.hpp"
#include "dosml/error.hpp"

namespace {

using dosml::RunConfig;
namespace cli = dosml::cli;

struct Flag {
  std::string option;  // CLI11 option spec
  std::string key;     // config key it sets
  std::string help;
};

struct Sub {
  CLI::App* app = nullptr;
  std::string config_file;
  std::vector<std::string> sets;
  std::map<std::string, std::string> values;  // config key -> flag value
  std::vector<std::pair<CLI::Option*, std::string>> flags;
  bool print_config = false;
};

const std::vector<Flag> kCommon{
    {"-i,--input", "input", "input file or directory"},
    {"-o,--output", "output", "output directory"},
    {"--seed", "seed", "random seed"},
    {"--threads", "threads", "worker threads (0 = all cores)"},
};

const std::map<std::string, std::vector<Flag>> kExtra{
    {"extract",
     {{"--label", "label", "label for every extracted flow"},
      {"--udp-timeout-us", "udp_timeout_us", "UDP inactivity timeout"},
      {"--tcp-timeout-us", "tcp_timeout_us", "TCP inactivity timeout"}}},
    {"split", {{"--schema", "schema", "CSV schema: lycos or a schema file"}}},
    {"sweep",
     {{"--schema", "schema", "CSV schema"},
      {"--targets", "variance_targets", "comma list of variance targets"},
      {"--folds", "folds", "cross-validation folds"},
      {"--model", "sweep_model", "classifier family"}}},
    {"compare",
     {{"--schema", "schema", "CSV schema"},
      {"--models", "models", "comma list of families"},
      {"--variance", "compare_variance", "variance target of the PCA arm"},
      {"--breakdown", "breakdown_model", "family for the per-class table"}}},
    {"importance", {{"--schema", "schema", "CSV schema"}, {"--top", "importance_top", "features kept in the refit"}}},
    {"pca-report",
     {{"--schema", "schema", "CSV schema"}, {"--loadings-top", "loadings_top", "components with loadings listed"}}},
    {"synth-blobs",
     {{"--classes", "blobs_classes", "classes"},
      {"--dims", "blobs_d", "dimensions"},
      {"--informative", "blobs_informative", "informative dimensions"},
      {"--separation", "blobs_separation", "distance between class means"},
      {"--noise", "blobs_noise", "noise standard deviation"},
      {"--n-per-class", "blobs_n_per_class", "rows per class"}}},
    {"synth-flows", {{"--scenario", "scenario", "scenario name, comma list, or all"}}},
    {"pipeline", {{"--schema", "schema", "CSV schema"}, {"--steps", "pipeline_steps", "comma list of steps"}}},
    {"accept", {{"--lycos-dir", "lycos_dir", "directory with the LYCOS-IDS2017 CSVs"}}},
};

void add_options(Sub& s, const std::vector<Flag>& flags) {
  for (const auto& f : flags) {
    auto* opt = s.app->add_option(f.option, s.values[f.key], f.help);
    s.flags.emplace_back(opt, f.key);
  }
}

RunConfig resolve(const Sub& s) {
  RunConfig cfg;
  if (!s.config_file.empty()) cfg.load_file(s.config_file);
  cfg.apply_process_env();
  for (const auto& [opt, key] : s.flags) {
    if (opt->count() > 0) cfg.set(key, s.values.at(key), "flag " + opt->get_name());
  }
  for (const auto& kv : s.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw dosml::ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1), "--set");
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Flow feature extraction and PCA-based DoS detection experiments"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all", "help for every command");

  std::map<std::string, Sub> subs;
  std::vector<std::pair<std::string, std::string>> all;
  for (const auto& c : cli::commands()) all.emplace_back(c.name, c.help);
  all.emplace_back("accept", "run the acceptance criteria and print PASS/FAIL per criterion");
  std::vector<int> only;
  std::string work_dir;

  for (const auto& [name, help] : all) {
    Sub& s = subs[name];
    s.app = app.add_subcommand(name, help);
    s.app->add_option("-c,--config", s.config_file, "key=value config file")->check(CLI::ExistingFile);
    s.app->add_option("-s,--set", s.sets, "override one setting, key=value (repeatable)");
    s.app->add_flag("--print-config", s.print_config, "print the resolved configuration and exit");
    add_options(s, kCommon);
    if (auto it = kExtra.find(name); it != kExtra.end()) add_options(s, it->second);
  }
  subs["accept"].app->add_option("--only", only, "criterion ids to run");
  subs["accept"].app->add_option("--work-dir", work_dir, "keep rerun outputs here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitUsage;
  }

  try {
    for (auto& [name, s] : subs) {
      if (!s.app->parsed()) continue;
      const RunConfig cfg = resolve(s);
      if (s.print_config) {
        std::cout << cfg.serialize(name);
        return cli::kExitOk;
      }
      if (name == "accept") {
        for (int id : only) {
          if (id < 1 || id > 7) throw dosml::ConfigError("criterion ids run from 1 to 7, got " + std::to_string(id));
        }
        acceptance::Options opt;
        opt.lycos_dir = cfg.get("lycos_dir");
        opt.threads = static_cast<int>(cfg.get_int("threads"));
        opt.only = only;
        opt.work_dir = work_dir;
        const auto results = acceptance::run_all(opt, &std::cout);
        return acceptance::all_passed(results) ? cli::kExitOk : cli::kExitAcceptance;
      }
      for (const auto& c : cli::commands()) {
        if (c.name == name) return c.fn(cfg, std::cout);
      }
    }
  } catch (const dosml::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::kExitData;
  }
  return cli::kExitUsage;
}
