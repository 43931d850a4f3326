#include "frolicher/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return frol::cli::run(argc, argv, std::cout, std::cerr); }
