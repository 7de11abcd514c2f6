#include <iostream>

#include "speclab/cli.hpp"

int main(int argc, char** argv) { return speclab::cli::main_entry(argc, argv, std::cout, std::cerr); }
