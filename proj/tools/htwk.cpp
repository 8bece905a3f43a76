#include "htwk/cli.hpp"

int main(int argc, char** argv) { return htwk::cli::run_command(argc, argv); }
