#include <iostream>

#include "qpn/cli.hpp"

int main(int argc, char** argv) { return qpn::cli::run(argc, argv, std::cout, std::cerr); }
