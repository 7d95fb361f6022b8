#include "cli.hpp"

int main(int argc, char** argv) { return delconf::cli::run(argc, argv); }
