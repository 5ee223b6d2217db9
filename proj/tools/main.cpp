#include <iostream>

#include "apfold/cli.hpp"

int main(int argc, char** argv) { return apfold::cli::run(argc, argv, std::cout, std::cerr); }
