#include "ftl/cli.hpp"

int main(int argc, char** argv) { return ftl::cli::run(argc, argv); }
