#include <iostream>

#include "qstab/cli/commands.hpp"

int main(int argc, char** argv) { return qstab::cli::run_cli(argc, argv, std::cout, std::cerr); }
