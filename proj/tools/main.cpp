#include <iostream>

#include "irkmg/cli.hpp"

int main(int argc, char **argv)
{
  return irkmg::cli_main(argc, argv, std::cout, std::cerr);
}
