#include <iostream>

#include "cli.hpp"

int main(int argc, char** argv) { return netanom::cli::run(argc, argv, std::cout, std::cerr); }
