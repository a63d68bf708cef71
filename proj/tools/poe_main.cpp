#include <iostream>
#include <string>
#include <vector>

#include "poe/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return poe::cli::run_cli(args, std::cout, std::cerr);
}
