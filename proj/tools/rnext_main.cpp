#include <iostream>

#include "rnext/cli.hpp"

int main(int argc, char** argv) { return rnext::cli_main(argc, argv, std::cout, std::cerr); }
