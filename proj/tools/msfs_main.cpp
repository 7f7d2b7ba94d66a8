#include "msfs/cli.hpp"

int main(int argc, char** argv) { return msfs::cli::run(argc, argv); }
