#include "filmrec/cli/cli.hpp"

int main(int argc, char** argv) { return filmrec::cli::run_cli(argc, argv); }
