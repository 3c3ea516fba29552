#include "cbnlearn/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return cbnlearn::run_cli(argc, argv, std::cout, std::cerr); }
