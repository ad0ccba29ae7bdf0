#include "scensim/cli.hpp"

int main(int argc, char** argv) { return scensim::cli_main(argc, argv); }
