#include "cli/commands.hpp"

int main(int argc, char** argv) { return plap::cli::run_cli(argc, argv); }
