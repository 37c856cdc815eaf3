#include <iostream>
#include <string>
#include <vector>

#include "gapprobe/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return gapprobe::cli::run(args, std::cout, std::cerr);
}
