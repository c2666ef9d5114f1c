#include "cli.hpp"

int main(int argc, char** argv) { return intact::cli::run(argc, argv); }
