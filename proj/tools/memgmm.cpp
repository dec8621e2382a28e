#include <iostream>
#include <string>
#include <vector>

#include "memgmm/cli.hpp"

int main(int argc, char** argv) {
  return memgmm::cli::run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
