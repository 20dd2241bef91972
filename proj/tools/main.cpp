#include "tailrisk/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return tailrisk::cli_main(argc, argv, std::cout, std::cerr); }
