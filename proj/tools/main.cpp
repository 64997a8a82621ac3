#include "cli.hpp"
int main(int argc, char** argv) { return aitd::cli::run(argc, argv); }
