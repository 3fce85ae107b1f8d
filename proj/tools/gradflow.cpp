#include "gradflow/experiment.hpp"

int main(int argc, char** argv) { return gradflow::experiment::cli_main(argc, argv); }
