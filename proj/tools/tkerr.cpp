#include <iostream>
#include <string>
#include <vector>

#include "tkerr/cli/app.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return tkerr::cli::run_cli(args, std::cout, std::cerr);
}
