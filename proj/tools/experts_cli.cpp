#include <iostream>

#include "experts/cli.hpp"

int main(int argc, char** argv) { return experts::run_cli(argc, argv, std::cout, std::cerr); }
