#include "slgad/cli.hpp"

int main(int argc, char** argv) { return slgad::cli::run(argc, argv); }
