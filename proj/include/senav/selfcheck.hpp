#pragma once

// Property battery over the core math: group axioms, transform round
// trips, the eigenvalue inequalities bounding the attitude-error signal,
// and the quaternion/rotation homomorphism. Shared by the CLI selftest
// verb and the acceptance suite.

#include <string>
#include <vector>

namespace senav {

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;
};

std::vector<CheckResult> run_selfchecks();

}  // namespace senav
