#include <iostream>

#include "addrclust/cli.hpp"

int main(int argc, char** argv) {
  return addrclust::run_cli(argc, argv, std::cout, std::cerr);
}
