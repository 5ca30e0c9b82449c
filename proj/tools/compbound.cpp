#include "compbound/cli.hpp"

int main(int argc, char** argv) { return compbound::cli::main_entry(argc, argv); }
