#include "offshore/cli.hpp"

int main(int argc, char** argv) { return offshore::run_main(argc, argv); }
