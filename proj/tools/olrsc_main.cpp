#include "olrsc/cli.hpp"

#include <string>
#include <vector>

int main(int argc, char** argv) {
    return olrsc::cli_main(std::vector<std::string>(argv + 1, argv + argc));
}
