#include "barter/simplex.hpp"

#include <cmath>
#include <stdexcept>

namespace barter {
namespace {

constexpr double kEps = 1e-9;

class Tableau {
 public:
  Tableau(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), t_(rows * (cols + 1), 0.0), obj_(cols + 1, 0.0) {}

  double& at(std::size_t r, std::size_t c) { return t_[r * (cols_ + 1) + c]; }
  double& rhs(std::size_t r) { return at(r, cols_); }
  std::vector<double>& obj() { return obj_; }

  void pivot(std::size_t pr, std::size_t pc) {
    const double pv = at(pr, pc);
    for (std::size_t c = 0; c <= cols_; ++c) at(pr, c) /= pv;
    for (std::size_t r = 0; r < rows_; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (std::size_t c = 0; c <= cols_; ++c) at(r, c) -= f * at(pr, c);
    }
    const double f = obj_[pc];
    if (f != 0.0) {
      for (std::size_t c = 0; c <= cols_; ++c) obj_[c] -= f * at(pr, c);
    }
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> t_;
  std::vector<double> obj_;
};

// Runs Bland's rule on columns [0, active); the objective row holds reduced costs (negative = improving).
LpStatus iterate(Tableau& tab, std::vector<std::size_t>& basis, std::size_t active, std::int64_t& iters,
                 std::int64_t max_iters) {
  while (true) {
    if (iters >= max_iters) return LpStatus::kIterationLimit;
    std::size_t enter = active;
    for (std::size_t c = 0; c < active; ++c) {
      if (tab.obj()[c] < -kEps) {
        enter = c;
        break;
      }
    }
    if (enter == active) return LpStatus::kOptimal;
    std::size_t leave = tab.rows();
    double best = 0.0;
    for (std::size_t r = 0; r < tab.rows(); ++r) {
      const double a = tab.at(r, enter);
      if (a <= kEps) continue;
      const double ratio = tab.rhs(r) / a;
      if (leave == tab.rows() || ratio < best - kEps || (std::abs(ratio - best) <= kEps && basis[r] < basis[leave])) {
        leave = r;
        best = ratio;
      }
    }
    if (leave == tab.rows()) return LpStatus::kUnbounded;
    tab.pivot(leave, enter);
    basis[leave] = enter;
    ++iters;
  }
}

}  // namespace

LpResult solve_lp(const LpProblem& lp, std::int64_t max_iterations) {
  const std::size_t nx = lp.c.size();
  if (lp.lower.size() != nx || lp.upper.size() != nx) throw std::invalid_argument("bounds size mismatch");
  for (std::size_t v = 0; v < nx; ++v) {
    if (!std::isfinite(lp.lower[v])) throw std::invalid_argument("lower bounds must be finite");
  }

  // Rows: equalities, inequalities (with slack), finite upper bounds (with slack). Variables shifted by lower.
  struct Row {
    std::vector<std::pair<std::size_t, double>> coef;
    double rhs;
    bool slack;
  };
  std::vector<Row> rows;
  auto shifted = [&](const std::vector<double>& a, double b) {
    Row r;
    r.rhs = b;
    for (std::size_t v = 0; v < nx; ++v) {
      if (a[v] != 0.0) {
        r.coef.emplace_back(v, a[v]);
        r.rhs -= a[v] * lp.lower[v];
      }
    }
    return r;
  };
  for (std::size_t e = 0; e < lp.a_eq.size(); ++e) {
    Row r = shifted(lp.a_eq[e], lp.b_eq[e]);
    r.slack = false;
    rows.push_back(std::move(r));
  }
  for (std::size_t e = 0; e < lp.a_ub.size(); ++e) {
    Row r = shifted(lp.a_ub[e], lp.b_ub[e]);
    r.slack = true;
    rows.push_back(std::move(r));
  }
  for (std::size_t v = 0; v < nx; ++v) {
    if (std::isfinite(lp.upper[v])) {
      if (lp.upper[v] < lp.lower[v] - kEps) return LpResult{LpStatus::kInfeasible, 0.0, {}, 0};
      rows.push_back(Row{{{v, 1.0}}, lp.upper[v] - lp.lower[v], true});
    }
  }
  std::size_t n_slack = 0;
  for (const auto& r : rows) n_slack += r.slack ? 1 : 0;
  const std::size_t nr = rows.size();
  const std::size_t n_struct = nx + n_slack;
  const std::size_t ncols = n_struct + nr;  // plus one artificial per row
  Tableau tab(nr, ncols);
  std::vector<std::size_t> basis(nr);
  std::size_t slack_col = nx;
  for (std::size_t r = 0; r < nr; ++r) {
    const double sign = rows[r].rhs < 0.0 ? -1.0 : 1.0;
    for (auto [v, a] : rows[r].coef) tab.at(r, v) = sign * a;
    if (rows[r].slack) tab.at(r, slack_col++) = sign;
    tab.rhs(r) = sign * rows[r].rhs;
    tab.at(r, n_struct + r) = 1.0;
    basis[r] = n_struct + r;
  }

  LpResult res;
  // Phase 1: maximize -sum(artificials); reduced costs start as -sum of rows over structural columns.
  auto& obj = tab.obj();
  for (std::size_t r = 0; r < nr; ++r) {
    for (std::size_t c = 0; c < n_struct; ++c) obj[c] -= tab.at(r, c);
    obj[ncols] -= tab.rhs(r);
  }
  LpStatus st = iterate(tab, basis, n_struct, res.iterations, max_iterations);
  if (st == LpStatus::kIterationLimit) {
    res.status = st;
    return res;
  }
  if (obj[ncols] < -1e-7 * (1.0 + static_cast<double>(nr))) {
    res.status = LpStatus::kInfeasible;
    return res;
  }
  // Drive remaining artificials out of the basis where possible.
  for (std::size_t r = 0; r < nr; ++r) {
    if (basis[r] < n_struct) continue;
    for (std::size_t c = 0; c < n_struct; ++c) {
      if (std::abs(tab.at(r, c)) > kEps) {
        tab.pivot(r, c);
        basis[r] = c;
        break;
      }
    }
  }

  // Phase 2 objective: reduced cost c_B B^-1 A_j - c_j for maximization.
  std::fill(obj.begin(), obj.end(), 0.0);
  for (std::size_t v = 0; v < nx; ++v) obj[v] = -lp.c[v];
  for (std::size_t r = 0; r < nr; ++r) {
    const std::size_t b = basis[r];
    if (b < nx && lp.c[b] != 0.0) {
      const double cb = lp.c[b];
      for (std::size_t c = 0; c <= ncols; ++c) obj[c] += cb * tab.at(r, c);
    }
  }
  st = iterate(tab, basis, n_struct, res.iterations, max_iterations);
  if (st != LpStatus::kOptimal) {
    res.status = st;
    return res;
  }
  res.status = LpStatus::kOptimal;
  res.x = lp.lower;
  for (std::size_t r = 0; r < nr; ++r) {
    if (basis[r] < nx) res.x[basis[r]] += tab.rhs(r);
  }
  res.value = 0.0;
  for (std::size_t v = 0; v < nx; ++v) res.value += lp.c[v] * res.x[v];
  return res;
}

}  // namespace barter
