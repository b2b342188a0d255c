#include "canal4d/cli/app.hpp"

int main(int argc, char** argv) { return canal4d::cli::run(argc, argv); }
