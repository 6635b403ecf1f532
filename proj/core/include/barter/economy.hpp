#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "barter/matrix.hpp"
#include "barter/rational.hpp"

namespace barter {

enum class UtilityKind { kLinear, kCara };

// Separable utility of one agent: linear c.x, or offset - sum_j exp(-a_j x_j).
struct UtilitySpec {
  UtilityKind kind = UtilityKind::kLinear;
  std::vector<Rational> linear;
  std::vector<double> cara;
  double offset = 0.0;

  static UtilitySpec Linear(std::vector<Rational> c);
  static UtilitySpec Cara(std::vector<double> a, double offset);

  std::size_t dimension() const;
  bool is_linear() const { return kind == UtilityKind::kLinear; }

  double value(std::span<const std::int64_t> row) const;
  double value(std::span<const double> row) const;
  std::vector<double> gradient(std::span<const double> row) const;
  // Diagonal of the Hessian (zero for linear).
  std::vector<double> hessian_diagonal(std::span<const double> row) const;
  // Contribution of coordinate j alone (linear: c_j x_j, cara: -exp(-a_j x_j)).
  double term(std::size_t j, double xj) const;
  double marginal(std::size_t j, double xj) const;
};

// Per-ER bounds on the change of holdings: l_j <= delta_j <= L_j.
struct Rationing {
  std::vector<std::int64_t> lower;
  std::vector<std::int64_t> upper;
};

struct NetworkBlock {
  std::vector<std::pair<int, int>> edges;
  std::optional<IntMatrix> capacities;
};

using Allocation = IntMatrix;

struct EconomyInstance {
  int n_agents = 0;
  int n_commodities = 0;
  std::vector<Rational> prices;
  std::vector<Rational> weights;
  IntMatrix endowments;
  std::vector<UtilitySpec> utilities;
  std::optional<Rationing> rationing;
  std::optional<IntMatrix> capacities;
  std::optional<NetworkBlock> network;

  std::size_t n() const { return static_cast<std::size_t>(n_agents); }
  std::size_t m() const { return static_cast<std::size_t>(n_commodities); }
  bool all_linear() const;
};

// Returns the first violated instance invariant, or nullopt when the instance is valid.
std::optional<std::string> validate_instance(const EconomyInstance& inst);
void require_valid(const EconomyInstance& inst);

struct FeasibilityReport {
  bool feasible = true;
  std::vector<std::string> violations;
  explicit operator bool() const { return feasible; }
};

FeasibilityReport is_feasible(const EconomyInstance& inst, const Allocation& x);

double utility(const EconomyInstance& inst, int h, const Allocation& x);
// Exact linear utility (requires a linear agent).
Rational linear_utility(const EconomyInstance& inst, int h, const Allocation& x);
std::vector<double> utilities(const EconomyInstance& inst, const Allocation& x);
std::vector<double> utility_gradient(const EconomyInstance& inst, int h, const Allocation& x);

// Budget value P.q^h for each agent and weighted supply sum_h d^h q^h for each commodity.
std::vector<Rational> budgets(const EconomyInstance& inst);
std::vector<Rational> weighted_supply(const EconomyInstance& inst);
// Plain total supply b_j = sum_h q_j^h.
std::vector<std::int64_t> total_supply(const EconomyInstance& inst);

}  // namespace barter
