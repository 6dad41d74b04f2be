#include "sflr/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return sflr::cli_main(args, std::cout, std::cerr);
}
