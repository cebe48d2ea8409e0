#include <iostream>

#include "divopt/cli.hpp"

int main(int argc, char** argv) { return divopt::run_cli(argc, argv, std::cout, std::cerr); }
