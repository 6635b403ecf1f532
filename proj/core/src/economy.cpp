#include "barter/economy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace barter {
namespace {

__extension__ using Wide = __int128;

void check_agent(const EconomyInstance& inst, int h) {
  if (h < 0 || h >= inst.n_agents) throw std::out_of_range("agent index out of range");
}

void check_shape(const EconomyInstance& inst, const Allocation& x) {
  if (x.rows() != inst.n() || x.cols() != inst.m()) {
    throw std::invalid_argument("allocation shape does not match instance");
  }
}

}  // namespace

UtilitySpec UtilitySpec::Linear(std::vector<Rational> c) {
  UtilitySpec u;
  u.kind = UtilityKind::kLinear;
  u.linear = std::move(c);
  return u;
}

UtilitySpec UtilitySpec::Cara(std::vector<double> a, double offset) {
  UtilitySpec u;
  u.kind = UtilityKind::kCara;
  u.cara = std::move(a);
  u.offset = offset;
  return u;
}

std::size_t UtilitySpec::dimension() const { return is_linear() ? linear.size() : cara.size(); }

double UtilitySpec::term(std::size_t j, double xj) const {
  if (is_linear()) return linear[j].to_double() * xj;
  return -std::exp(-cara[j] * xj);
}

double UtilitySpec::marginal(std::size_t j, double xj) const {
  if (is_linear()) return linear[j].to_double();
  return cara[j] * std::exp(-cara[j] * xj);
}

double UtilitySpec::value(std::span<const std::int64_t> row) const {
  if (is_linear()) {
    // Integer coefficients are the common case and sit in the local-search inner loop.
    if (std::all_of(linear.begin(), linear.end(), [](const Rational& c) { return c.is_integer(); })) {
      Wide sum = 0;
      for (std::size_t j = 0; j < row.size(); ++j) sum += static_cast<Wide>(linear[j].num()) * row[j];
      return static_cast<double>(sum);
    }
    Rational acc;
    for (std::size_t j = 0; j < row.size(); ++j) acc += linear[j] * Rational(row[j]);
    return acc.to_double();
  }
  double acc = offset;
  for (std::size_t j = 0; j < row.size(); ++j) acc -= std::exp(-cara[j] * static_cast<double>(row[j]));
  return acc;
}

double UtilitySpec::value(std::span<const double> row) const {
  double acc = is_linear() ? 0.0 : offset;
  for (std::size_t j = 0; j < row.size(); ++j) acc += term(j, row[j]);
  return acc;
}

std::vector<double> UtilitySpec::gradient(std::span<const double> row) const {
  std::vector<double> g(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) g[j] = marginal(j, row[j]);
  return g;
}

std::vector<double> UtilitySpec::hessian_diagonal(std::span<const double> row) const {
  std::vector<double> hd(row.size(), 0.0);
  if (is_linear()) return hd;
  for (std::size_t j = 0; j < row.size(); ++j) hd[j] = -cara[j] * cara[j] * std::exp(-cara[j] * row[j]);
  return hd;
}

bool EconomyInstance::all_linear() const {
  for (const auto& u : utilities) {
    if (!u.is_linear()) return false;
  }
  return true;
}

std::optional<std::string> validate_instance(const EconomyInstance& inst) {
  if (inst.n_agents <= 0) return "n_agents must be positive";
  if (inst.n_commodities <= 0) return "n_commodities must be positive";
  const std::size_t n = inst.n();
  const std::size_t m = inst.m();
  if (inst.prices.size() != m) return "prices must have one entry per commodity";
  for (const auto& p : inst.prices) {
    if (p.sign() <= 0) return "price must be positive";
  }
  if (inst.weights.size() != n) return "weights must have one entry per agent";
  for (const auto& d : inst.weights) {
    if (d.sign() <= 0) return "weight must be positive";
  }
  if (inst.endowments.rows() != n || inst.endowments.cols() != m) return "endowments must be n x m";
  for (auto v : inst.endowments.data()) {
    if (v < 0) return "endowments must be nonnegative";
  }
  if (inst.utilities.size() != n) return "utilities list must have one entry per agent";
  for (const auto& u : inst.utilities) {
    if (u.dimension() != m) return "utility dimension must equal n_commodities";
    if (u.is_linear()) {
      for (const auto& c : u.linear) {
        if (c.sign() < 0) return "linear utility coefficients must be nonnegative";
      }
    } else {
      for (double a : u.cara) {
        if (!(a > 0.0) || !std::isfinite(a)) return "cara coefficients must be positive";
      }
      if (!std::isfinite(u.offset)) return "cara offset must be finite";
    }
  }
  if (inst.rationing) {
    const auto& r = *inst.rationing;
    if (r.lower.size() != m || r.upper.size() != m) return "rationing bounds must have one entry per commodity";
    for (std::size_t j = 0; j < m; ++j) {
      if (r.upper[j] < 0 || r.lower[j] > 0) return "L >= 0 >= l required";
    }
  }
  if (inst.capacities) {
    const auto& c = *inst.capacities;
    if (c.rows() != n || c.cols() != m) return "capacities must be n x m";
    for (std::size_t h = 0; h < n; ++h) {
      for (std::size_t j = 0; j < m; ++j) {
        if (c(h, j) < 0) return "capacities must be nonnegative";
        if (inst.endowments(h, j) > c(h, j)) return "endowments exceed capacities";
      }
    }
  }
  if (inst.network) {
    for (auto [a, b] : inst.network->edges) {
      if (a < 0 || b < 0 || a >= inst.n_agents || b >= inst.n_agents) return "network edge out of range";
      if (a == b) return "network self-loop";
    }
    if (inst.network->capacities) {
      const auto& c = *inst.network->capacities;
      if (c.rows() != n || c.cols() != m) return "network capacities must be n x m";
      for (std::size_t h = 0; h < n; ++h) {
        for (std::size_t j = 0; j < m; ++j) {
          if (inst.endowments(h, j) > c(h, j)) return "endowments exceed network capacities";
        }
      }
    }
  }
  return std::nullopt;
}

void require_valid(const EconomyInstance& inst) {
  if (auto err = validate_instance(inst)) throw std::invalid_argument("invalid instance: " + *err);
}

std::vector<Rational> budgets(const EconomyInstance& inst) {
  std::vector<Rational> out(inst.n());
  for (std::size_t h = 0; h < inst.n(); ++h) {
    for (std::size_t j = 0; j < inst.m(); ++j) out[h] += inst.prices[j] * Rational(inst.endowments(h, j));
  }
  return out;
}

std::vector<Rational> weighted_supply(const EconomyInstance& inst) {
  std::vector<Rational> out(inst.m());
  for (std::size_t j = 0; j < inst.m(); ++j) {
    for (std::size_t h = 0; h < inst.n(); ++h) out[j] += inst.weights[h] * Rational(inst.endowments(h, j));
  }
  return out;
}

std::vector<std::int64_t> total_supply(const EconomyInstance& inst) {
  std::vector<std::int64_t> out(inst.m(), 0);
  for (std::size_t h = 0; h < inst.n(); ++h) {
    for (std::size_t j = 0; j < inst.m(); ++j) out[j] += inst.endowments(h, j);
  }
  return out;
}

FeasibilityReport is_feasible(const EconomyInstance& inst, const Allocation& x) {
  check_shape(inst, x);
  FeasibilityReport rep;
  auto fail = [&](std::string msg) {
    rep.feasible = false;
    rep.violations.push_back(std::move(msg));
  };
  for (std::size_t h = 0; h < inst.n(); ++h) {
    for (std::size_t j = 0; j < inst.m(); ++j) {
      if (x(h, j) < 0) fail("nonnegativity x[" + std::to_string(h) + "][" + std::to_string(j) + "]");
    }
  }
  const auto b = budgets(inst);
  for (std::size_t h = 0; h < inst.n(); ++h) {
    Rational spend;
    for (std::size_t j = 0; j < inst.m(); ++j) spend += inst.prices[j] * Rational(x(h, j));
    if (spend != b[h]) fail("budget row " + std::to_string(h));
  }
  const auto s = weighted_supply(inst);
  for (std::size_t j = 0; j < inst.m(); ++j) {
    Rational total;
    for (std::size_t h = 0; h < inst.n(); ++h) total += inst.weights[h] * Rational(x(h, j));
    if (total != s[j]) fail("conservation row " + std::to_string(j));
  }
  auto check_caps = [&](const IntMatrix& cap, const char* label) {
    for (std::size_t h = 0; h < inst.n(); ++h) {
      for (std::size_t j = 0; j < inst.m(); ++j) {
        if (x(h, j) > cap(h, j)) {
          fail(std::string(label) + " x[" + std::to_string(h) + "][" + std::to_string(j) + "]");
        }
      }
    }
  };
  if (inst.capacities) check_caps(*inst.capacities, "capacity");
  return rep;
}

double utility(const EconomyInstance& inst, int h, const Allocation& x) {
  check_agent(inst, h);
  check_shape(inst, x);
  return inst.utilities[static_cast<std::size_t>(h)].value(x.row(static_cast<std::size_t>(h)));
}

Rational linear_utility(const EconomyInstance& inst, int h, const Allocation& x) {
  check_agent(inst, h);
  check_shape(inst, x);
  const auto& u = inst.utilities[static_cast<std::size_t>(h)];
  if (!u.is_linear()) throw std::invalid_argument("exact utility requires a linear agent");
  Rational acc;
  auto row = x.row(static_cast<std::size_t>(h));
  for (std::size_t j = 0; j < row.size(); ++j) acc += u.linear[j] * Rational(row[j]);
  return acc;
}

std::vector<double> utilities(const EconomyInstance& inst, const Allocation& x) {
  check_shape(inst, x);
  std::vector<double> out(inst.n());
  for (std::size_t h = 0; h < inst.n(); ++h) out[h] = inst.utilities[h].value(x.row(h));
  return out;
}

std::vector<double> utility_gradient(const EconomyInstance& inst, int h, const Allocation& x) {
  check_agent(inst, h);
  check_shape(inst, x);
  auto row = x.row(static_cast<std::size_t>(h));
  std::vector<double> xr(row.begin(), row.end());
  return inst.utilities[static_cast<std::size_t>(h)].gradient(xr);
}

}  // namespace barter
