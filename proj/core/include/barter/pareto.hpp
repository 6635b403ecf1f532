#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "barter/economy.hpp"

namespace barter {

using UtilityVector = std::vector<double>;
using VectorSet = std::vector<UtilityVector>;

// Maximization dominance: a dominates b iff a >= b componentwise with one strict.
bool dominates(const UtilityVector& a, const UtilityVector& b);

// Indices of the nondominated vectors (first occurrence of each duplicate), in input order.
std::vector<std::size_t> pareto_filter_indices(const VectorSet& vs);
VectorSet pareto_filter(const VectorSet& vs);

struct Frontier {
  std::vector<Allocation> allocations;
  std::vector<UtilityVector> utilities;
  int wave = 0;

  // Distinct utility vectors among the members.
  std::size_t utility_count() const;
};

struct PathEnumeration {
  std::vector<Frontier> waves;  // waves[0] is the initial endowment
  Frontier terminal;
  bool stabilized = false;
  std::int64_t expansions = 0;
};

struct PathEnumerationOptions {
  int max_waves = 1000;
  std::size_t max_frontier = 100000;
};

// Repeatedly expands every member by both endpoint moves of every candidate direction,
// keeps moves that weakly improve every agent on the endowment, and filters the union
// with the incumbents. Linear utilities only.
PathEnumeration enumerate_paths(const EconomyInstance& inst, const PathEnumerationOptions& options = {});

std::string frontier_csv(const PathEnumeration& result);

}  // namespace barter
