#include "tsf/cli.hpp"

int main(int argc, char** argv) { return tsf::cli::run_cli(argc, argv); }
