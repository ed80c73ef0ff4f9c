#include <iostream>

#include "monoped/commands.hpp"

int main(int argc, char** argv) {
  return monoped::run_cli(argc, argv, std::cout, std::cerr);
}
