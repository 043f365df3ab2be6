#include "r0kit/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return r0kit::run_cli(argc, argv, std::cout, std::cerr); }
