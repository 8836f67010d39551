#include <iostream>

#include "xustat/cli.hpp"

int main(int argc, char** argv) { return xu::cli::run_cli(argc, argv, std::cout, std::cerr); }
