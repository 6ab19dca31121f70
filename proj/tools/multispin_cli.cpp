#include <iostream>
#include <string>
#include <vector>

#include "multispin/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return multispin::run(args, std::cout, std::cerr);
}
