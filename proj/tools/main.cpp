#include "app.hpp"

int main(int argc, char** argv) { return fracafd::cli::run(argc, argv); }
