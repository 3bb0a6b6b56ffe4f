#include "singtrace/cli.hpp"

int main(int argc, char** argv) { return singtrace::cli::main(argc, argv); }
