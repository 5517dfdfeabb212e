#include <iostream>

#include "bingham/cli.hpp"

int main(int argc, char** argv) { return bingham::run_cli(argc, argv, std::cout, std::cerr); }
