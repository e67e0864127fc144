#include "cli.hpp"

int main(int argc, char** argv) { return lanegraph::cli::run(argc, argv); }
