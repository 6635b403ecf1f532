#include "barter/oracle.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

namespace barter {
namespace {

BigInt binomial(std::int64_t n, std::int64_t k) {
  BigInt r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r *= (n - k + i);
    r /= i;
  }
  return r;
}

}  // namespace

BigInt allocation_count_bound(const EconomyInstance& inst) {
  BigInt r = 1;
  const auto n = static_cast<std::int64_t>(inst.n_agents);
  for (auto b : total_supply(inst)) r *= binomial(n + b - 1, b);
  return r;
}

EnumerationResult enumerate_allocations(const EconomyInstance& inst, const BigInt& limit) {
  require_valid(inst);
  EnumerationResult res;
  res.bound = allocation_count_bound(inst);
  if (res.bound > limit) throw LimitExceeded("allocation space bound exceeds the enumeration limit");
  const std::size_t n = inst.n();
  const std::size_t m = inst.m();
  const auto budget = budgets(inst);
  std::vector<Rational> remaining = weighted_supply(inst);
  Allocation x(n, m, 0);
  auto cap = [&](std::size_t h, std::size_t j) {
    return inst.capacities ? (*inst.capacities)(h, j) : std::numeric_limits<std::int64_t>::max();
  };

  std::function<void(std::size_t, std::size_t, Rational)> rec = [&](std::size_t h, std::size_t j, Rational left) {
    const Rational& d = inst.weights[h];
    const Rational& p = inst.prices[j];
    if (h + 1 == n) {
      // Last agent takes exactly what remains; its budget must balance.
      Rational spend;
      for (std::size_t c = 0; c < m; ++c) {
        Rational v = remaining[c] / d;
        if (!v.is_integer() || v.sign() < 0 || v.num() > cap(h, c)) return;
        x(h, c) = v.num();
        spend += inst.prices[c] * v;
      }
      if (spend != budget[h]) return;
      res.allocations.push_back(x);
      return;
    }
    if (j + 1 == m) {
      Rational v = left / p;
      if (!v.is_integer() || v.sign() < 0 || v.num() > cap(h, j)) return;
      if (d * v > remaining[j]) return;
      x(h, j) = v.num();
      remaining[j] -= d * v;
      rec(h + 1, 0, budget[h + 1]);
      remaining[j] += d * v;
      return;
    }
    const std::int64_t hi = std::min({(left / p).floor(), (remaining[j] / d).floor(), cap(h, j)});
    for (std::int64_t v = 0; v <= hi; ++v) {
      x(h, j) = v;
      const Rational used = d * Rational(v);
      remaining[j] -= used;
      rec(h, j + 1, left - p * Rational(v));
      remaining[j] += used;
    }
  };
  rec(0, 0, budget[0]);
  res.count = static_cast<std::int64_t>(res.allocations.size());
  return res;
}

RationalMatrix linear_welfare_matrix(const EconomyInstance& inst) {
  if (!inst.all_linear()) throw std::invalid_argument("linear welfare requires linear utilities");
  RationalMatrix c(inst.n(), inst.m());
  for (std::size_t h = 0; h < inst.n(); ++h) {
    for (std::size_t j = 0; j < inst.m(); ++j) c(h, j) = inst.utilities[h].linear[j];
  }
  return c;
}

Rational linear_welfare(const RationalMatrix& c, const Allocation& x) {
  Rational w;
  for (std::size_t h = 0; h < x.rows(); ++h) {
    for (std::size_t j = 0; j < x.cols(); ++j) w += c(h, j) * Rational(x(h, j));
  }
  return w;
}

LpProblem relaxation_lp(const EconomyInstance& inst, const RationalMatrix& c, bool individual_rationality) {
  const std::size_t n = inst.n();
  const std::size_t m = inst.m();
  const std::size_t nx = n * m;
  LpProblem lp;
  lp.c.resize(nx);
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t j = 0; j < m; ++j) lp.c[h * m + j] = c(h, j).to_double();
  }
  const auto budget = budgets(inst);
  const auto supply = weighted_supply(inst);
  for (std::size_t h = 0; h < n; ++h) {
    std::vector<double> row(nx, 0.0);
    for (std::size_t j = 0; j < m; ++j) row[h * m + j] = inst.prices[j].to_double();
    lp.a_eq.push_back(row);
    lp.b_eq.push_back(budget[h].to_double());
  }
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<double> row(nx, 0.0);
    for (std::size_t h = 0; h < n; ++h) row[h * m + j] = inst.weights[h].to_double();
    lp.a_eq.push_back(row);
    lp.b_eq.push_back(supply[j].to_double());
  }
  if (individual_rationality) {
    for (std::size_t h = 0; h < n; ++h) {
      std::vector<double> row(nx, 0.0);
      double ref = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        row[h * m + j] = -inst.utilities[h].linear[j].to_double();
        ref += inst.utilities[h].linear[j].to_double() * static_cast<double>(inst.endowments(h, j));
      }
      lp.a_ub.push_back(row);
      lp.b_ub.push_back(-ref);
    }
  }
  lp.lower.assign(nx, 0.0);
  lp.upper.resize(nx);
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t j = 0; j < m; ++j) {
      double ub = (supply[j] / inst.weights[h]).to_double();
      if (inst.capacities) ub = std::min(ub, static_cast<double>((*inst.capacities)(h, j)));
      lp.upper[h * m + j] = ub;
    }
  }
  return lp;
}

BnbResult branch_and_bound_linear(const EconomyInstance& inst, const BnbOptions& options) {
  return branch_and_bound_linear(inst, linear_welfare_matrix(inst), options);
}

BnbResult branch_and_bound_linear(const EconomyInstance& inst, const RationalMatrix& c, const BnbOptions& options) {
  require_valid(inst);
  if (c.rows() != inst.n() || c.cols() != inst.m()) throw std::invalid_argument("welfare matrix must be n x m");
  const std::size_t n = inst.n();
  const std::size_t m = inst.m();
  const LpProblem root = relaxation_lp(inst, c, options.individual_rationality);

  BnbResult res;
  std::optional<Rational> best;
  bool root_done = false;

  auto try_incumbent = [&](const std::vector<double>& xs) {
    Allocation x(n, m, 0);
    for (std::size_t a = 0; a < n * m; ++a) x.data()[a] = std::llround(xs[a]);
    if (!is_feasible(inst, x)) return;
    if (options.individual_rationality) {
      for (std::size_t h = 0; h < n; ++h) {
        Rational uh;
        Rational u0;
        for (std::size_t j = 0; j < m; ++j) {
          uh += inst.utilities[h].linear[j] * Rational(x(h, j));
          u0 += inst.utilities[h].linear[j] * Rational(inst.endowments(h, j));
        }
        if (uh < u0) return;
      }
    }
    Rational w = linear_welfare(c, x);
    if (!best || w > *best) {
      best = w;
      res.allocation = x;
    }
  };

  {
    std::vector<double> q(inst.endowments.data().begin(), inst.endowments.data().end());
    try_incumbent(q);
  }
  // Depth-first over bound vectors.
  std::vector<std::pair<std::vector<double>, std::vector<double>>> stack{{root.lower, root.upper}};
  while (!stack.empty()) {
    if (res.nodes >= options.node_limit) throw LimitExceeded("branch-and-bound node limit exceeded");
    auto [lo, up] = std::move(stack.back());
    stack.pop_back();
    ++res.nodes;
    LpProblem lp = root;
    lp.lower = lo;
    lp.upper = up;
    const LpResult r = solve_lp(lp);
    res.simplex_iterations += r.iterations;
    if (!root_done) {
      root_done = true;
      res.root_lp_value = r.value;
    }
    if (r.status != LpStatus::kOptimal) continue;
    if (best && r.value <= best->to_double() + 1e-7 * (1.0 + std::abs(r.value))) continue;
    std::size_t branch = n * m;
    double best_frac = 0.0;
    for (std::size_t a = 0; a < n * m; ++a) {
      const double f = r.x[a] - std::floor(r.x[a]);
      const double dist = std::min(f, 1.0 - f);
      if (dist > 1e-7 && dist > best_frac) {
        best_frac = dist;
        branch = a;
      }
    }
    if (branch == n * m) {
      try_incumbent(r.x);
      continue;
    }
    auto down_up = up;
    down_up[branch] = std::floor(r.x[branch]);
    auto up_lo = lo;
    up_lo[branch] = std::ceil(r.x[branch]);
    stack.emplace_back(lo, down_up);
    stack.emplace_back(up_lo, up);
  }
  if (!best) throw std::runtime_error("branch-and-bound found no integer allocation");
  res.welfare = *best;
  return res;
}

}  // namespace barter
