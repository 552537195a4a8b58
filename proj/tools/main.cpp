#include "cli.hpp"

int main(int argc, char** argv) { return shbuf::cli::run_cli(argc, argv); }
