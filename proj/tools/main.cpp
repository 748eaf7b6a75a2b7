#include <string>
#include <vector>

#include "procedit/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv, argv + argc);
  auto io = procedit::cli::default_io();
  return procedit::cli::dispatch(args, io);
}
