#include <iostream>
#include <string>
#include <vector>

#include "covfam/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return covfam::run_cli(args, std::cout, std::cerr);
}
