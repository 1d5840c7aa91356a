#include <iostream>

#include "cspd/acceptance.hpp"

int main() {
  const auto results = cspd::run_acceptance(cspd::AcceptanceOptions{}, std::cout);
  bool ok = results.size() == 12;
  for (const auto& r : results) ok = ok && r.passed;
  return ok ? 0 : 1;
}
