#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "barter/economy.hpp"

namespace barter {

// Factor levels: price variability (log-normal sigma), association between an agent's
// endowment row and its own utility row, and between its endowment row and its partner's
// utility row (partner of h is (h + 1) mod n).
struct FactorLevels {
  double price_sigma = 0.0;
  double same_assoc = 0.0;
  double cross_assoc = 0.0;
};

struct GeneratorOptions {
  std::int64_t max_endowment = 10;
  std::int64_t max_coefficient = 10;
  std::int64_t base_price = 10;
  bool cara = false;
  // Swap attempts per row when imposing an association level.
  int swap_attempts = 0;
};

EconomyInstance generate_instance(int n, int m, std::uint64_t seed, const FactorLevels& factors = {},
                                  const GeneratorOptions& options = {});

// Pearson correlation of average ranks; 0 when either side is constant.
double spearman(std::span<const double> a, std::span<const double> b);

}  // namespace barter
