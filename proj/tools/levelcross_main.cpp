#include <iostream>

#include "levelcross/cli.hpp"

int main(int argc, char** argv) { return levelcross::cli_main(argc, argv, std::cout, std::cerr); }
