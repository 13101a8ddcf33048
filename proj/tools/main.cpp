#include "ipqp/cli.hpp"

int main(int argc, char** argv) { return ipqp::cli::cli_main(argc, argv); }
