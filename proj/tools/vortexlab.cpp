#include <vortexlab/cli.hpp>

#include <iostream>

int main(int argc, char** argv) { return vortexlab::run_cli(argc, argv, std::cout, std::cerr); }
