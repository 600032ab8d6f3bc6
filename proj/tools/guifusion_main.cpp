#include <iostream>

#include "guifusion/cli.hpp"

int main(int argc, char** argv) { return guifusion::run_cli(argc, argv, std::cout, std::cerr); }
