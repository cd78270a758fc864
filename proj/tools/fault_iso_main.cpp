#include "fault_iso/cli.hpp"

int main(int argc, char** argv) { return fault_iso::cli::run_cli(argc, argv); }
