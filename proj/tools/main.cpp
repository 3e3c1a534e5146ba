#include "condlaw/cli.hpp"

int main(int argc, char** argv) { return condlaw::cli::main(argc, argv); }
