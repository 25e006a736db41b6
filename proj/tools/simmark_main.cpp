#include "simmark/cli.hpp"

int main(int argc, char** argv) { return simmark::cli::run(argc, argv); }
