#include "sab/cli.hpp"

int main(int argc, char** argv) { return sab::cli::run(argc, argv); }
