#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "dosml/config.hpp"

namespace dosml::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitAcceptance = 3;

// Each command reads its settings from cfg, writes into cfg "output", echoes
// the resolved config there, and returns an exit code (0, or 3 when a
// configured threshold is violated).
using CommandFn = int (*)(const RunConfig& cfg, std::ostream& log);

int cmd_extract(const RunConfig& cfg, std::ostream& log);
int cmd_split(const RunConfig& cfg, std::ostream& log);
int cmd_sweep(const RunConfig& cfg, std::ostream& log);
int cmd_compare(const RunConfig& cfg, std::ostream& log);
int cmd_importance(const RunConfig& cfg, std::ostream& log);
int cmd_pca_report(const RunConfig& cfg, std::ostream& log);
int cmd_synth_blobs(const RunConfig& cfg, std::ostream& log);
int cmd_synth_flows(const RunConfig& cfg, std::ostream& log);
int cmd_pipeline(const RunConfig& cfg, std::ostream& log);

struct CommandInfo {
  std::string name;
  std::string help;
  CommandFn fn;
};
const std::vector<CommandInfo>& commands();

}  // namespace dosml::cli
