#include <iostream>
#include <thread>

#include "oco/acceptance.hpp"

int main() {
  oco::AcceptanceOptions options;
  options.jobs = std::max(1u, std::thread::hardware_concurrency());
  options.on_result = [](const oco::CheckResult& r) { std::cout << oco::format_check(r) << std::endl; };
  const auto results = oco::run_acceptance(options);
  std::size_t passed = 0;
  for (const auto& r : results) passed += r.pass ? 1 : 0;
  std::cout << passed << "/" << results.size() << " criteria passed\n";
  return passed == results.size() ? 0 : 1;
}
