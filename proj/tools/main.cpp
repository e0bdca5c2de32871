#include <iostream>

#include "incube/cli.hpp"

int main(int argc, char** argv) { return incube::run_cli(argc, argv, std::cout, std::cerr); }
