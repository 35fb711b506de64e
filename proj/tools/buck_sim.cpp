#include <iostream>

#include "buck/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return buck::run_cli(args, std::cout, std::cerr);
}
