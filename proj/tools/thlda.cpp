#include <spdlog/spdlog.h>

#include <iostream>
#include <string>
#include <vector>

#include "thlda/app.hpp"
#include "thlda/config.hpp"
#include "thlda/errors.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  for (const auto& a : args) {
    if (a == "--help" || a == "-h" || a == "help") {
      std::cout << thlda::usage_text();
      return 0;
    }
  }
  if (args.empty()) {
    std::cerr << thlda::usage_text();
    return 2;
  }
  try {
    return thlda::execute(thlda::parse_config(args));
  } catch (const thlda::UsageError& e) {
    spdlog::error("usage error: {}", e.what());
    return 2;
  }
}
