#include "abco/cli.hpp"

int main(int argc, char** argv) { return abco::run_cli(argc, argv); }
