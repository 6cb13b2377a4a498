#include "hsn/commands.hpp"

int main(int argc, char **argv) { return hsn::run_cli(argc, argv); }
