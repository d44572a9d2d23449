#include <iostream>
#include <string>
#include <vector>

#include "selftest/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return selftest::cli::run(args, std::cout, std::cerr);
}
