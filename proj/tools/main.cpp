#include "mfh/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mfh::cli::run(argc, argv, std::cout, std::cerr); }
