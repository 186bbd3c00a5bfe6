#include "wheelodo/cli.hpp"

int main(int argc, char** argv) { return wheelodo::cli::run(argc, argv); }
