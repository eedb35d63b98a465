#include <iostream>

#include "radpair/cli.hpp"

int main(int argc, char** argv) { return radpair::io::run_cli(argc, argv, std::cout, std::cerr); }
