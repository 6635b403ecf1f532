#pragma once

#include <cstdint>
#include <limits>
#include <vector>

namespace barter {

// maximize c'x  s.t.  A_eq x = b_eq,  A_ub x <= b_ub,  lower <= x <= upper.
struct LpProblem {
  std::vector<double> c;
  std::vector<std::vector<double>> a_eq;
  std::vector<double> b_eq;
  std::vector<std::vector<double>> a_ub;
  std::vector<double> b_ub;
  std::vector<double> lower;
  std::vector<double> upper;  // +infinity when unbounded above
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double value = 0.0;
  std::vector<double> x;
  std::int64_t iterations = 0;
};

// Dense two-phase tableau simplex with Bland's rule.
LpResult solve_lp(const LpProblem& lp, std::int64_t max_iterations = 100000);

}  // namespace barter
