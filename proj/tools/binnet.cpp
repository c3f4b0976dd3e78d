#include <iostream>

#include "binnet/cli.hpp"

int main(int argc, char** argv) {
    return binnet::cli::run(argc, argv, std::cout, std::cerr);
}
