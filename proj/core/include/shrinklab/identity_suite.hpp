#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace shrinklab {

struct IdentityCheck {
  std::string name;
  double max_deviation = 0.0;
  std::int64_t failures = 0;
};

struct IdentitySuiteResult {
  std::int64_t trials = 0;
  double tolerance = 0.0;
  std::vector<IdentityCheck> checks;
  bool all_pass = true;
};

// Randomized battery of the algebraic identities of the shrinking
// map: semigroup composition, oddness, contraction, the Lipschitz
// bounds in the radius, the detour inequality with its equality case,
// the threshold equivalence, and the dead-zone doubling bound.
// Inputs are drawn with |x|, r, s <= ~200 so the float roundoff of the
// exact identities stays well under the tolerance; boundary cases
// (|x| = r, r = 0) are injected and checked exactly.
IdentitySuiteResult run_identity_suite(std::int64_t trials,
                                       std::uint64_t seed,
                                       double tolerance = 1e-12);

}  // namespace shrinklab
