// Copyright 2026 The dignn Authors. Apache 2.0 License.

#include <iostream>
#include <string>
#include <vector>

#include "dignn/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return dignn::run_command(args, std::cout, std::cerr);
}
