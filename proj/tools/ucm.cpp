#include <iostream>

#include "ucm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return ucm::execute(args, std::cout, std::cerr);
}
