#include <iostream>
#include <string>
#include <vector>

#include "hvsim/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return hvsim::run_cli(args, std::cout, std::cerr);
}
