#include <iostream>

#include "staledoc/commands.hpp"

int main(int argc, char** argv) {
  return staledoc::cli::run_cli(argc, argv, std::cout, std::cerr);
}
