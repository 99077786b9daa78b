#include <iostream>

#include "vmtorus/cli.hpp"

int main(int argc, char** argv) { return vmtorus::run_cli(argc, argv, std::cout, std::cerr); }
