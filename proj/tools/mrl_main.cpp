#include <string>
#include <vector>

#include "mrl/cli.hpp"

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return mrl::run_cli(args);
}
