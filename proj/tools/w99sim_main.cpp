#include "w99sim/cli.hpp"

int main(int argc, char ** argv)
{
  return w99sim::cli::main(argc, argv);
}
