#include <iostream>

#include "mhdflux/acceptance.hpp"

int main() {
  using namespace mhdflux;
  const AcceptanceReport report = run_acceptance(Tolerances{}, {}, [](const CriterionResult& r) { std::cout << result_line(r) << std::endl; });
  std::size_t failed = 0;
  for (const auto& c : report.criteria) failed += c.passed ? 0 : 1;
  std::cout << report.criteria.size() - failed << "/" << report.criteria.size() << " criteria passed\n";
  return failed == 0 ? 0 : 1;
}
