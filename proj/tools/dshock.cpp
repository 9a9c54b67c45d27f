#include <iostream>

#include "dshock/app/commands.hpp"

int main(int argc, char** argv) { return dshock::app::run_cli(argc, argv, std::cout, std::cerr); }
