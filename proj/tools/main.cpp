#include "selfex/cli.hpp"

int main(int argc, char** argv) { return selfex::cli::main_entry(argc, argv); }
