#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace acceptance {

enum class Status { pass, fail, skip };

struct Result {
  int id = 0;
  std::string name;
  Status status = Status::fail;
  std::string detail;
  double seconds = 0;
  double budget_s = 0;  // 0: no runtime limit
};

struct Options {
  std::string lycos_dir;  // empty: criterion 6 is skipped
  std::string work_dir;   // scratch space for the determinism reruns
  std::vector<int> only;  // empty: all
  int threads = 0;
};

Result criterion(int id, const Options& opt);
std::vector<Result> run_all(const Options& opt, std::ostream* progress = nullptr);

// "criterion 3 classifier_oracles: PASS (1.23 s) detail"
std::string format(const Result& r);
bool all_passed(const std::vector<Result>& results);

}  // namespace acceptance
