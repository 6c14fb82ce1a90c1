#include "rankcorrect/cli.hpp"

int main(int argc, char** argv) { return rankcorrect::cli::run(argc, argv); }
