#include <iostream>

#include "signfem/cli.hpp"

int main(int argc, char** argv) { return signfem::cli::main(argc, argv, std::cout, std::cerr); }
