#include <iostream>

#include "hierclass/cli.hpp"

int main(int argc, char** argv) { return hierclass::cli::run(argc, argv, std::cout, std::cerr); }
