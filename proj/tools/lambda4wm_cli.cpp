#include "lambda4wm/cli.hpp"

int main(int argc, char** argv) { return lambda4wm::run_cli(argc, argv); }
