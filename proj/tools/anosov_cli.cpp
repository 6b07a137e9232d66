#include <iostream>

#include "anosov/cli.hpp"

int main(int argc, char** argv) { return anosov::cli_main(argc, argv, std::cout, std::cerr); }
