#include "colex/cli.hpp"

int main(int argc, char** argv) { return colex::cli::run(argc, argv); }
