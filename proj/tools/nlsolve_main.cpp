#include <iostream>
#include <string>
#include <vector>

#include "nlsolve/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return nlsolve::cli::run(args, std::cout, std::cerr);
}
