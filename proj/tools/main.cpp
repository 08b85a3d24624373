#include "ced/cli.hpp"

int main(int argc, char** argv) {
  return ced::run_cli(std::vector<std::string>(argv + 1, argv + argc));
}
