#include "ogs/cli.hpp"

int main(int argc, char** argv) { return ogs::run_cli(argc, argv); }
