#include "dsgraph/cli.hpp"

int main(int argc, char** argv) { return dsgraph::cli_main(argc, argv); }
