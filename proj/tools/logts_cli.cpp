#include "logts/cli.hpp"

int main(int argc, char** argv) { return logts::cli::main(argc, argv); }
