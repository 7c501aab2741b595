#include <iostream>

#include "toruslz/cli.hpp"

int main(int argc, char** argv) { return toruslz::cli::run_cli(argc, argv, std::cout, std::cerr); }
