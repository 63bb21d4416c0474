#include "wlfield/cli.hpp"

int main(int argc, char** argv) { return wlf::cli::run(argc, argv); }
