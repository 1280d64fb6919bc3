#include <vector>

#include "scorematch/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return scorematch::cli::run(args);
}
