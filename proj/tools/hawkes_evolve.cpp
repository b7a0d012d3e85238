#include "hawkes_evolve/cli.hpp"

int main(int argc, char** argv) { return hawkes_evolve::cli::run(argc, argv); }
