#include <iostream>

#include "soc/cli.hpp"

int main(int argc, char** argv) { return soc::run_cli(argc, argv, std::cout, std::cerr); }
