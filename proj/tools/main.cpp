#include "cli.hpp"

int main(int argc, char** argv) { return seal::cli::run_cli(argc, argv); }
