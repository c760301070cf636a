#include "stochlab/cli.hpp"

int main(int argc, char** argv) { return stochlab::cli::run(argc, argv); }
