#include <vector>

#include "sparsear/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return sparsear::dispatch(args);
}
