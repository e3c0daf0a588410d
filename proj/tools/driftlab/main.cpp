#include "driftlab_cli/commands.hpp"

int main(int argc, char** argv) { return driftlab::cli::run(argc, argv); }
