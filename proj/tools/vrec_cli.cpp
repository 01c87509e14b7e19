#include <iostream>

#include "vrec/cli.hpp"

int main(int argc, char** argv) { return vrec::cli::run(argc, argv, std::cout, std::cerr); }
