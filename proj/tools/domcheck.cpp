#include <iostream>

#include "domcheck/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return domcheck::run_command(std::move(args), std::cout, std::cerr).exit_code;
}
