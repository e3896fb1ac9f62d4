#include "cli.h"

int main(int argc, char** argv) { return slterr::cli::Main(argc, argv); }
