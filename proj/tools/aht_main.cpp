#include "aht/cli/commands.hpp"

int main(int argc, char** argv) { return aht::cli::run(argc, argv); }
