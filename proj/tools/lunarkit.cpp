#include <iostream>
#include <string>
#include <vector>

#include "lunarkit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return lunarkit::cli::run(args, std::cout, std::cerr);
}
