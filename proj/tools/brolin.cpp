#include <iostream>
#include <string>
#include <vector>

#include "brolin/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return brolin::cli::run_cli(args, std::cout, std::cerr);
}
