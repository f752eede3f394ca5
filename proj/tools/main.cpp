#include "cli.hpp"

int main(int argc, char** argv) {
    return vatd::cli::cli_main(argc, argv);
}
