#include "odis/runner.hpp"

int main(int argc, char** argv) { return odis::cli_main(argc, argv); }
