#include <iostream>

#include "riskshare/cli.hpp"

int main(int argc, char** argv) {
  return riskshare::cli::run(argc, argv, std::cout, std::cerr);
}
