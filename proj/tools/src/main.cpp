#include <iostream>

#include "driftx_cli/cli.hpp"

int main(int argc, char** argv) { return driftx::cli::run(argc, argv, std::cout, std::cerr); }
