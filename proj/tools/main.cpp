#include "certapprox/cli.hpp"

int main(int argc, char** argv) { return certapprox::cli::run(argc, argv); }
