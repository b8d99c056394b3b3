#include <iostream>

#include "tcv/cli.hpp"

int main(int argc, char** argv) { return tcv::cli::run(argc, argv, std::cout, std::cerr); }
