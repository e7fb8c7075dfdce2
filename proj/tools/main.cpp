#include "ala/harness/cli.hpp"

int main(int argc, char** argv) { return ala::harness::cli_main(argc, argv); }
