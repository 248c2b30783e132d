#include "specmap/cli.hpp"

int main(int argc, char** argv) { return specmap::cli::run_cli(argc, argv); }
