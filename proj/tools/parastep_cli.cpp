#include <iostream>

#include "parastep/cli.hpp"

int main(int argc, char** argv) { return parastep::cli_main(argc, argv, std::cout, std::cerr); }
