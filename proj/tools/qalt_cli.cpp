#include "qalt/cli.hpp"

int main(int argc, char** argv) { return qalt::run_cli(argc, argv); }
