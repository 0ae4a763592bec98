#include <iostream>

#include "epiflow/cli.hpp"

int main(int argc, char** argv) { return epiflow::cli::run(argc, argv, std::cout, std::cerr); }
