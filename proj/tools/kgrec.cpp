#include <iostream>
#include <string>
#include <vector>

#include "kgrec/cli/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return kgrec::cli::dispatch(args, std::cout, std::cerr);
}
