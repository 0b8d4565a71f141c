#include <iostream>
#include <string>
#include <vector>

#include "jlese/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  return jlese::cli::run(args, std::cout, std::cerr);
}
