#include "gmpnoma/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return gmpnoma::cli::cli_main(argc, argv, std::cout, std::cerr); }
