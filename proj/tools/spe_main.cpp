#include <iostream>

#include "spe/driver.hpp"

int main(int argc, char** argv) {
  return spe::run_cli(argc, argv, std::cout, std::cerr);
}
