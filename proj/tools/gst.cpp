#include <iostream>

#include "gst/cli/commands.hpp"

int main(int argc, char** argv) {
  return gst::cli::Run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}
