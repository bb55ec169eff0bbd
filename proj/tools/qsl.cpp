#include <iostream>

#include "qsl/cli.hpp"

int main(int argc, char** argv) { return qsl::cli::run(argc, argv, std::cout, std::cerr); }
