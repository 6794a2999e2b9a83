#include "hotm/cli.hpp"

int main(int argc, char** argv) { return hotm::cli::run(argc, argv); }
