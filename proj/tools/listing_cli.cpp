#include <iostream>
#include <string>
#include <vector>

#include "listing/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return listing::run_cli(args, std::cout, std::cerr);
}
