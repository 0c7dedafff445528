#include <iostream>

#include "sbc/app.hpp"

int main(int argc, char** argv) { return sbc::run_cli(argc, argv, std::cout, std::cerr); }
