#include "peaklab/cli.hpp"

int main(int argc, char** argv) { return peaklab::run(argc, argv); }
