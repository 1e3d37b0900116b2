#include <cstdlib>
#include <iostream>
#include <string>

#include "criteria.hpp"

// Usage: dosml_acceptance [criterion ids...]
// LYCOS-IDS2017 location comes from DOSML_LYCOS_DIR.
int main(int argc, char** argv) {
  acceptance::Options opt;
  if (const char* dir = std::getenv("DOSML_LYCOS_DIR")) opt.lycos_dir = dir;
  for (int i = 1; i < argc; ++i) {
    try {
      const int id = std::stoi(argv[i]);
      if (id < 1 || id > 7) throw std::out_of_range("id");
      opt.only.push_back(id);
    } catch (const std::exception&) {
      std::cerr << "usage: " << argv[0] << " [criterion ids...]\n";
      return 1;
    }
  }
  const auto results = acceptance::run_all(opt, &std::cout);
  return acceptance::all_passed(results) ? 0 : 3;
}
