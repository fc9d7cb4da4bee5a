#include <iostream>
#include <string>
#include <vector>

#include "charflow/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return charflow::cli::run(args, std::cout);
}
