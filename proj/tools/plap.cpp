#include <iostream>

#include "plap/cli.hpp"

int main(int argc, char** argv) {
  return plap::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
