#include <iostream>

#include "pretherm/cli.hpp"

int main(int argc, char** argv) { return pretherm::run_cli(argc, argv, std::cout, std::cerr); }
