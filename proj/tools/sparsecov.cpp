#include "sparsecov/cli.hpp"

int main(int argc, char** argv) { return sparsecov::cli::run(argc, argv); }
