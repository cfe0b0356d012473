#include <string>
#include <vector>

#include "mmm/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return mmm::cli::run(args);
}
