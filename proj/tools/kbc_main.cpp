#include "kbc/cli.hpp"

int main(int argc, char** argv) { return kbc::run_cli(argc, argv); }
