#include "isospec/cli.hpp"

int main(int argc, char** argv) { return isospec::cli::main_entry(argc, argv); }
