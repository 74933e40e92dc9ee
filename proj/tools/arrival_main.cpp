#include <iostream>

#include "arrival/runner/run.hpp"

int main(int argc, char** argv) {
  return arrival::runner::cli_main(argc, argv, std::cout, std::cerr);
}
