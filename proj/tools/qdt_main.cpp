#include "qdt/pipeline.hpp"

int main(int argc, char** argv) { return qdt::run_cli(argc, argv); }
