#include "cli.hpp"

int main(int argc, char** argv) { return pcn::cli::run(argc, argv); }
