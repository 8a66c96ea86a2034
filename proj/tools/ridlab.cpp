#include "ridlab/cli/commands.hpp"

int main(int argc, char** argv) { return ridlab::cli::run(argc, argv); }
