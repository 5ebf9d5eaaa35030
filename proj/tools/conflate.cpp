#include <string>
#include <vector>

#include "conflate/cli.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return conflate::cli::dispatch(args);
}
