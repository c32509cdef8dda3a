#include <iostream>

#include "kanto/cli.hpp"

int main(int argc, char** argv) { return kanto::cli::run(argc, argv, std::cout, std::cerr); }
