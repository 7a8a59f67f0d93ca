#include "cli.hpp"

int main(int argc, char** argv) { return relmod::cli::main_entry(argc, argv); }
