#include "gapfit/cli.hpp"

int main(int argc, char** argv) { return gapfit::cli::main(argc, argv); }
