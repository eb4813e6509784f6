#include "mh/cli.hpp"

int main(int argc, char** argv) { return mh::cli::run_cli(argc, argv); }
