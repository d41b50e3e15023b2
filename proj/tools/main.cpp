#include "hyp2nav/cli.hpp"

int main(int argc, char** argv) { return hyp2nav::cli::run_cli(argc, argv); }
