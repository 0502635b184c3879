#include <iostream>
#include <string>
#include <vector>

#include "kkm/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv, argv + argc);
    return kkm::cli::run(args, std::cout, std::cerr);
}
