#include "porttfidf/cli.hpp"

int main(int argc, char** argv) { return porttfidf::cli::run(argc, argv); }
