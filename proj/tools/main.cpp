#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return curvatur::run_cli(argc, argv, std::cout, std::cerr); }
