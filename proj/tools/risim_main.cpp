#include "risim/cli.hpp"

int main(int argc, char** argv) { return risim::run_cli(argc, argv); }
