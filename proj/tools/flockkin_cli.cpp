#include <iostream>

#include "flockkin/harness/commands.hpp"

int main(int argc, char** argv) { return flockkin::harness::run_cli(argc, argv, std::cout, std::cerr); }
