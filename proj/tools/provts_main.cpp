#include "provts/cli.hpp"

int main(int argc, char** argv) { return provts::run_cli(argc, argv); }
