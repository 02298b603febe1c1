#include "nlsgc/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return nlsgc::cli::main(argc, argv, std::cout, std::cerr); }
