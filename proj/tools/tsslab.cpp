#include "tsslab/cli.hpp"

#include <iostream>

int main(int argc, char** argv)
{
    return tsslab::run_cli(argc, argv, std::cout, std::cerr);
}
