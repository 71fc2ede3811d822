#include <cmath>
#include <iostream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "nqkr/propagator.hpp"

int main(int argc, char** argv) {
  const double k = nqkr::kPlasticNumber;
  if (std::abs(k * k * k - k - 1.0) > 1e-15) {
    std::cerr << "nqkr: plastic-number constant fails x^3 = x + 1\n";
    return 1;
  }
  return nqkr::cli::run(std::vector<std::string>(argv + 1, argv + argc));
}
