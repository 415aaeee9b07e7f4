#include "hjlab/cli.hpp"

int main(int argc, char** argv) { return hjlab::run_cli(argc, argv); }
