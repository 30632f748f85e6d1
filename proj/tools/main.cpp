#include "cli.hpp"

int main(int argc, char** argv) { return kscore::cli::run(argc, argv); }
