#include "swstab/cli.hpp"

int main(int argc, char** argv) { return swstab::cli::run_cli(argc, argv); }
