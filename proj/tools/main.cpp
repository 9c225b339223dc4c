#include <iostream>

#include "hadamard/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return hadamard::cli::run(args, std::cout, std::cerr);
}
