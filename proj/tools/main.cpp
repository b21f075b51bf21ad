#include "cli.hpp"

int main(int argc, char** argv) { return multmean::cli::run(argc, argv); }
