#include <iostream>

#include "sparsegen/cli.hpp"

int main(int argc, char** argv) {
    return sparsegen::cli::run(argc, argv, std::cout, std::cerr);
}
