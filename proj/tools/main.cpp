#include "dplab/cli.hpp"

int main(int argc, char** argv) { return dplab::run(argc, argv); }
