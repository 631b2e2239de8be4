#include <iostream>
#include <string>
#include <vector>

#include "znekit/cli.hpp"

int main(int argc, char** argv) {
  const std::vector<std::string> args(argv + 1, argv + argc);
  return znekit::cli::run_cli(args, std::cout, std::cerr);
}
