#include "farboot/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return farboot::run_cli(argc, argv, std::cout, std::cerr); }
