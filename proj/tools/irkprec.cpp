#include "irkprec/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return irkprec::run_cli(argc, argv, std::cout, std::cerr); }
