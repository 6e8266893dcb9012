#include "qasched/cli.hpp"

int main(int argc, char** argv) { return qasched::cli_main(argc, argv); }
