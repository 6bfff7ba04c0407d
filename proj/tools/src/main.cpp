#include "pcc_cli/cli.hpp"

int main(int argc, char** argv) { return pcc_cli::run_cli(argc, argv); }
