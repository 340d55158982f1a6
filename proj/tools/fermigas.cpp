#include <iostream>
#include <string>
#include <vector>

#include "fermigas/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return fermigas::run(args, std::cout, std::cerr);
}
