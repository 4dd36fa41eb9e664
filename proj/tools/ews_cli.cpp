#include "ews/runner.hpp"

int main(int argc, char** argv) { return ews::cli::main_entry(argc, argv); }
