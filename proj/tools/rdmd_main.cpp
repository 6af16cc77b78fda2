#include "rdmd/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return rdmd::cli::run_cli(argc, argv, std::cout, std::cerr); }
