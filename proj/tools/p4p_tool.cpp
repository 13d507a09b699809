#include <iostream>
#include <string>
#include <vector>

#include "p4p/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return p4p::cli::run(args, std::cout, std::cerr);
}
