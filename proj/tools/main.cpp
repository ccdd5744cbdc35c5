#include <iostream>

#include "signmotion/cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return signmotion::run_cli(args, std::cout, std::cerr);
}
