#include <vector>

#include "a2lc/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return a2lc::cli_main(args);
}
