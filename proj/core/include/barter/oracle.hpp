#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <optional>
#include <vector>

#include "barter/economy.hpp"
#include "barter/errors.hpp"
#include "barter/simplex.hpp"

namespace barter {

using BigInt = boost::multiprecision::cpp_int;
using RationalMatrix = Matrix<Rational>;

struct EnumerationResult {
  std::vector<Allocation> allocations;
  std::int64_t count = 0;
  BigInt bound;
};

// prod_j C(n + b_j - 1, b_j) with b_j the total endowment of commodity j.
// This bounds the allocation count for unit conservation weights.
BigInt allocation_count_bound(const EconomyInstance& inst);

// All feasible integer allocations, lexicographic over agents then commodities.
// Throws LimitExceeded when allocation_count_bound exceeds the limit.
EnumerationResult enumerate_allocations(const EconomyInstance& inst, const BigInt& limit);

struct BnbOptions {
  std::int64_t node_limit = 200000;
  // Add the rows c^h.x^h >= c^h.q^h for every agent.
  bool individual_rationality = false;
};

struct BnbResult {
  Rational welfare;
  Allocation allocation;
  double root_lp_value = 0.0;
  std::int64_t nodes = 0;
  std::int64_t simplex_iterations = 0;
};

// Welfare matrix c (n x m) from the instance's linear utilities.
RationalMatrix linear_welfare_matrix(const EconomyInstance& inst);

// The LP relaxation (budget and conservation rows, x >= 0) of max sum c.x.
LpProblem relaxation_lp(const EconomyInstance& inst, const RationalMatrix& c, bool individual_rationality = false);

BnbResult branch_and_bound_linear(const EconomyInstance& inst, const RationalMatrix& c, const BnbOptions& options = {});
BnbResult branch_and_bound_linear(const EconomyInstance& inst, const BnbOptions& options = {});

Rational linear_welfare(const RationalMatrix& c, const Allocation& x);

}  // namespace barter
