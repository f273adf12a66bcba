#include "pahc/cli.hpp"

int main(int argc, char** argv) { return pahc::cli::run(argc, argv); }
