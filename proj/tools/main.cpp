#include "revealed/cli.hpp"

int main(int argc, char** argv) { return revealed::run_cli(argc, argv); }
