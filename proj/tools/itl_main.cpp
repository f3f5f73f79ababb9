#include <iostream>

#include "itl/commands.hpp"

int main(int argc, char** argv) { return itl::run_cli(argc, argv, std::cout, std::cerr); }
