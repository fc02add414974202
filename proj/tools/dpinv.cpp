#include "dpinv/cli.hpp"

int main(int argc, char** argv) { return dpinv::cli::main_entry(argc, argv); }
