#include <iostream>

#include "stint/cli.hpp"

int main(int argc, char** argv) {
  return stint::run_cli(std::vector<std::string>(argv + 1, argv + argc), std::cout, std::cerr);
}
