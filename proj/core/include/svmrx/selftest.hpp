#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace svmrx::selftest {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;  // measured values, for the report line
};

// Cross-implementation oracle suite: every check recomputes the expected
// answer along an independent route (dense elimination, explicit inverses,
// characteristic polynomials, Monte Carlo, a projected-gradient QP solver)
// and compares the production path against it.
std::vector<CheckResult> run_all();

// Print one line per check; returns true when all pass.
bool run_and_report(std::ostream& out);

}  // namespace svmrx::selftest
