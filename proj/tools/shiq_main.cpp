#include <iostream>
#include <string>
#include <vector>

#include "shiq/frontend.hpp"

int main(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return shiq::cli_dispatch(args, std::cout, std::cerr);
}
