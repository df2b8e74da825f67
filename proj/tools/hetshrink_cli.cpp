#include "hetshrink/cli.hpp"

int main(int argc, char** argv) { return hetshrink::cli::run(argc, argv); }
