#include "driftwin/io/cli.hpp"

int main(int argc, char** argv) { return driftwin::io::cli_main(argc, argv); }
