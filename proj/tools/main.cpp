#include <iostream>

#include "causeway/io/cli.hpp"

int main(int argc, char** argv) {
    return causeway::io::run_cli({argv + 1, argv + argc}, std::cout, std::cerr);
}
