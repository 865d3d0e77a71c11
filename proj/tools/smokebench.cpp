#include "smokebench/cli.hpp"

int main(int argc, char** argv) { return smokebench::run_cli(argc, argv); }
