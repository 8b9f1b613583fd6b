#include "paretopt/problem_io.hpp"

int main(int argc, char** argv) { return paretopt::run_cli(argc, argv); }
