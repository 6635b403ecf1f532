#pragma once

// Independent reference implementations used by the unit and acceptance tests.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "barter/economy.hpp"
#include "barter/erp.hpp"
#include "barter/ipm.hpp"
#include "barter/ser.hpp"

namespace barter::ref {

inline std::int64_t rand_int(std::mt19937_64& rng, std::int64_t lo, std::int64_t hi) {
  return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng);
}

inline double rand_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

struct RandomInstanceOptions {
  int n = 2;
  int m = 2;
  bool cara = false;
  // Mix linear and cara agents when both flags are set.
  bool mixed = false;
  bool unit_prices = false;
  bool unit_weights = false;
  std::int64_t max_endowment = 10;
  std::int64_t max_price = 4;
  std::int64_t max_weight = 3;
  std::int64_t max_coefficient = 10;
};

inline EconomyInstance random_instance(std::mt19937_64& rng, const RandomInstanceOptions& o) {
  EconomyInstance inst;
  inst.n_agents = o.n;
  inst.n_commodities = o.m;
  for (int j = 0; j < o.m; ++j) inst.prices.emplace_back(o.unit_prices ? 1 : rand_int(rng, 1, o.max_price));
  for (int h = 0; h < o.n; ++h) inst.weights.emplace_back(o.unit_weights ? 1 : rand_int(rng, 1, o.max_weight));
  inst.endowments = IntMatrix(static_cast<std::size_t>(o.n), static_cast<std::size_t>(o.m), 0);
  for (int h = 0; h < o.n; ++h)
    for (int j = 0; j < o.m; ++j) inst.endowments(h, j) = rand_int(rng, 0, o.max_endowment);
  for (int h = 0; h < o.n; ++h) {
    bool cara = o.cara && (!o.mixed || rand_int(rng, 0, 1) == 1);
    if (cara) {
      std::vector<double> a;
      for (int j = 0; j < o.m; ++j) a.push_back(rand_real(rng, 0.01, 0.3));
      inst.utilities.push_back(UtilitySpec::Cara(a, static_cast<double>(o.m)));
    } else {
      std::vector<Rational> c;
      for (int j = 0; j < o.m; ++j) c.emplace_back(rand_int(rng, 0, o.max_coefficient));
      inst.utilities.push_back(UtilitySpec::Linear(c));
    }
  }
  return inst;
}

inline bool within_bounds(const EconomyInstance& inst, const Allocation& before, const Allocation& x) {
  for (std::size_t h = 0; h < x.rows(); ++h) {
    for (std::size_t j = 0; j < x.cols(); ++j) {
      if (x(h, j) < 0) return false;
      if (inst.capacities && x(h, j) > (*inst.capacities)(h, j)) return false;
      if (inst.rationing) {
        const auto delta = x(h, j) - before(h, j);
        if (delta < inst.rationing->lower[j] || delta > inst.rationing->upper[j]) return false;
      }
    }
  }
  return true;
}

// Feasible integer step lengths found by walking outward from 0 (the feasible set is an interval).
inline std::pair<std::int64_t, std::int64_t> brute_force_range(const EconomyInstance& inst, const Allocation& x,
                                                               const ERDirection& dir, std::int64_t cap = 1000000) {
  std::int64_t hi = 0;
  while (hi < cap && within_bounds(inst, x, dir.applied(x, hi + 1))) ++hi;
  std::int64_t lo = 0;
  while (lo > -cap && within_bounds(inst, x, dir.applied(x, lo - 1))) --lo;
  return {lo, hi};
}

// Nondominated, individually rational (u_h, u_k) pairs over every feasible alpha; equal pairs
// keep the alpha of smallest magnitude (negative first on ties).
inline std::vector<FrontierPoint> brute_force_frontier(const EconomyInstance& inst, const Allocation& x,
                                                       const ERDirection& dir) {
  auto [lo, hi] = brute_force_range(inst, x, dir);
  std::vector<FrontierPoint> all;
  for (std::int64_t a = lo; a <= hi; ++a) {
    Allocation y = dir.applied(x, a);
    all.push_back({a, inst.utilities[dir.h].value(y.row(dir.h)), inst.utilities[dir.k].value(y.row(dir.k))});
  }
  const FrontierPoint origin = *std::find_if(all.begin(), all.end(), [](const auto& p) { return p.alpha == 0; });
  auto closer = [](std::int64_t a, std::int64_t b) {
    return std::llabs(a) != std::llabs(b) ? std::llabs(a) < std::llabs(b) : a < b;
  };
  std::vector<FrontierPoint> out;
  for (const auto& p : all) {
    if (p.u_h < origin.u_h || p.u_k < origin.u_k) continue;
    bool keep = true;
    for (const auto& q : all) {
      if (q.u_h < origin.u_h || q.u_k < origin.u_k) continue;
      const bool dom = q.u_h >= p.u_h && q.u_k >= p.u_k && (q.u_h > p.u_h || q.u_k > p.u_k);
      const bool twin = q.u_h == p.u_h && q.u_k == p.u_k && closer(q.alpha, p.alpha);
      if (dom || twin) {
        keep = false;
        break;
      }
    }
    if (keep) out.push_back(p);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.alpha < b.alpha; });
  return out;
}

inline std::vector<std::int64_t> alphas(const std::vector<FrontierPoint>& pts) {
  std::vector<std::int64_t> a;
  for (const auto& p : pts) a.push_back(p.alpha);
  return a;
}

// All-pairs dominance filter; duplicates keep their first occurrence.
inline std::vector<std::size_t> naive_pareto_indices(const std::vector<std::vector<double>>& vs) {
  std::vector<std::size_t> keep;
  for (std::size_t a = 0; a < vs.size(); ++a) {
    bool ok = true;
    for (std::size_t b = 0; b < vs.size() && ok; ++b) {
      if (a == b) continue;
      bool ge = true;
      bool gt = false;
      for (std::size_t e = 0; e < vs[a].size(); ++e) {
        if (vs[b][e] < vs[a][e]) ge = false;
        if (vs[b][e] > vs[a][e]) gt = true;
      }
      if (ge && gt) ok = false;
      if (ge && !gt && b < a) ok = false;
    }
    if (ok) keep.push_back(a);
  }
  return keep;
}

// Is there an improving integer move anywhere in the neighbourhood? Scans every direction
// and every feasible alpha.
inline bool has_improving_move(const EconomyInstance& inst, const Allocation& x, Objective objective,
                               double welfare_slack = 1e-9) {
  const auto u0 = utilities(inst, x);
  double w0 = 0.0;
  for (double v : u0) w0 += v;
  for (int h = 0; h < inst.n_agents; ++h) {
    for (int k = h + 1; k < inst.n_agents; ++k) {
      for (int i = 0; i < inst.n_commodities; ++i) {
        for (int j = i + 1; j < inst.n_commodities; ++j) {
          const ERDirection dir = direction(inst, h, k, i, j);
          auto [lo, hi] = brute_force_range(inst, x, dir);
          for (std::int64_t a = lo; a <= hi; ++a) {
            if (a == 0) continue;
            Allocation y = dir.applied(x, a);
            const double uh = inst.utilities[h].value(y.row(h));
            const double uk = inst.utilities[k].value(y.row(k));
            if (objective == Objective::kBilateralPareto) {
              if (uh >= u0[h] && uk >= u0[k] && (uh > u0[h] || uk > u0[k])) return true;
            } else {
              const double w = w0 - u0[h] - u0[k] + uh + uk;
              if (w > w0 + welfare_slack * (1.0 + std::abs(w0))) return true;
            }
          }
        }
      }
    }
  }
  return false;
}

// Full Newton system of the perturbed KKT conditions assembled densely and solved by LU.
struct DenseNewtonSystem {
  Eigen::MatrixXd J;
  Eigen::VectorXd F;
};

// Full Jacobian of the eight residual blocks and the residual itself, assembled independently.
inline DenseNewtonSystem dense_newton_system(const IpmProblem& pb, const IpmState& st) {
  const int n = pb.n;
  const int m = pb.m;
  const int nv = static_cast<int>(pb.nv());
  const int ns = static_cast<int>(pb.ns());
  const int ny = static_cast<int>(pb.ny());
  // Unknown layout: dx, ds, dy, dt, dz_v, dw_v, dz_s, dw_s.
  const int ox = 0, os = nv, oy = os + ns, ot = oy + ny, ozv = ot + ns, owv = ozv + nv, ozs = owv + nv,
            ows = ozs + ns, dim = ows + ns;
  Eigen::MatrixXd J = Eigen::MatrixXd::Zero(dim, dim);
  Eigen::VectorXd F = Eigen::VectorXd::Zero(dim);
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(ny, nv);
  for (int h = 0; h < n; ++h) {
    for (int j = 0; j < m; ++j) {
      A(h, h * m + j) = pb.prices[j];
      A(n + j, h * m + j) = pb.weights[h];
    }
  }
  for (int j = 0; j < m; ++j) A(n + j, n * m + j) = 1.0;
  Eigen::VectorXd x = Eigen::Map<const Eigen::VectorXd>(st.x.data(), nv);
  Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(st.y.data(), ny);
  Eigen::VectorXd b = Eigen::Map<const Eigen::VectorXd>(pb.b.data(), ny);

  int row = 0;
  // Primal rows.
  J.block(row, ox, ny, nv) = A;
  F.segment(row, ny) = A * x - b;
  row += ny;
  std::vector<std::vector<double>> g(n), hd(n);
  for (int h = 0; h < n; ++h) {
    g[h] = pb.agent_gradient(h, st.x);
    hd[h] = pb.agent_hessian(h, st.x);
  }
  for (int h = 0; h < ns; ++h) {
    for (int j = 0; j < m; ++j) J(row + h, ox + h * m + j) = g[h][j];
    J(row + h, os + h) = -1.0;
    F(row + h) = pb.agent_utility(h, st.x) - pb.u_ref[h] - st.s[h];
  }
  row += ns;
  // Dual rows for v.
  J.block(row, oy, nv, ny) = A.transpose();
  F.segment(row, nv) = A.transpose() * y;
  for (int h = 0; h < n; ++h) {
    const double coef = (ns ? st.t[h] : 0.0) - pb.alpha[h];
    for (int j = 0; j < m; ++j) {
      const int a = h * m + j;
      J(row + a, ox + a) = coef * hd[h][j];
      if (ns) J(row + a, ot + h) = g[h][j];
      F(row + a) += coef * g[h][j];
    }
  }
  for (int a = 0; a < nv; ++a) {
    J(row + a, ozv + a) = -1.0;
    J(row + a, owv + a) = 1.0;
    F(row + a) += -st.z_v[a] + st.w_v[a];
  }
  row += nv;
  // Dual rows for s.
  for (int h = 0; h < ns; ++h) {
    J(row + h, ot + h) = -1.0;
    J(row + h, ozs + h) = -1.0;
    J(row + h, ows + h) = 1.0;
    F(row + h) = -st.t[h] - st.z_s[h] + st.w_s[h];
  }
  row += ns;
  // Complementarity.
  for (int a = 0; a < nv; ++a) {
    J(row + a, ox + a) = st.z_v[a];
    J(row + a, ozv + a) = st.x[a];
    F(row + a) = st.x[a] * st.z_v[a] - st.mu;
  }
  row += nv;
  for (int h = 0; h < ns; ++h) {
    J(row + h, os + h) = st.z_s[h];
    J(row + h, ozs + h) = st.s[h];
    F(row + h) = st.s[h] * st.z_s[h] - st.mu;
  }
  row += ns;
  for (int a = 0; a < nv; ++a) {
    J(row + a, ox + a) = -st.w_v[a];
    J(row + a, owv + a) = pb.upper_v[a] - st.x[a];
    F(row + a) = (pb.upper_v[a] - st.x[a]) * st.w_v[a] - st.mu;
  }
  row += nv;
  for (int h = 0; h < ns; ++h) {
    J(row + h, os + h) = -st.w_s[h];
    J(row + h, ows + h) = pb.upper_s[h] - st.s[h];
    F(row + h) = (pb.upper_s[h] - st.s[h]) * st.w_s[h] - st.mu;
  }
  row += ns;

  return {J, F};
}

inline NewtonDirection dense_newton_direction(const IpmProblem& pb, const IpmState& st) {
  const int nv = static_cast<int>(pb.nv());
  const int ns = static_cast<int>(pb.ns());
  const int ny = static_cast<int>(pb.ny());
  const int ox = 0, os = nv, oy = os + ns, ot = oy + ny, ozv = ot + ns, owv = ozv + nv, ozs = owv + nv,
            ows = ozs + ns;
  const auto [J, F] = dense_newton_system(pb, st);
  // The system gets very ill-conditioned near the end of a run, so solve it in extended
  // precision with a few refinement sweeps.
  using MatL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const MatL JL = J.cast<long double>();
  const VecL rhs = -F.cast<long double>();
  const Eigen::PartialPivLU<MatL> lu(JL);
  VecL dl = lu.solve(rhs);
  for (int sweep = 0; sweep < 3; ++sweep) dl += lu.solve(VecL(rhs - JL * dl));
  const Eigen::VectorXd d = dl.cast<double>();
  auto seg = [&](int off, int len) { return std::vector<double>(d.data() + off, d.data() + off + len); };
  NewtonDirection nd;
  nd.dx = seg(ox, nv);
  nd.ds = seg(os, ns);
  nd.dy = seg(oy, ny);
  nd.dt = seg(ot, ns);
  nd.dz_v = seg(ozv, nv);
  nd.dw_v = seg(owv, nv);
  nd.dz_s = seg(ozs, ns);
  nd.dw_s = seg(ows, ns);
  return nd;
}

inline std::vector<double> flatten(const NewtonDirection& d) {
  std::vector<double> v;
  for (const auto* blk : {&d.dx, &d.ds, &d.dy, &d.dt, &d.dz_v, &d.dw_v, &d.dz_s, &d.dw_s})
    v.insert(v.end(), blk->begin(), blk->end());
  return v;
}

// max |J d + F| / max |F| for the dense system, accumulated in extended precision.
inline double newton_relative_residual(const IpmProblem& pb, const IpmState& st, const NewtonDirection& d) {
  const auto [J, F] = dense_newton_system(pb, st);
  const auto flat = flatten(d);
  using VecL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  VecL dl(static_cast<Eigen::Index>(flat.size()));
  for (std::size_t e = 0; e < flat.size(); ++e) dl(static_cast<Eigen::Index>(e)) = flat[e];
  const VecL r = J.cast<long double>() * dl + F.cast<long double>();
  const long double scale = F.cast<long double>().cwiseAbs().maxCoeff();
  return static_cast<double>(r.cwiseAbs().maxCoeff() / (scale > 0 ? scale : 1.0L));
}

// max_e |a_e - b_e| / max_e |b_e|
inline double relative_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double diff = 0.0;
  double scale = 0.0;
  for (std::size_t e = 0; e < a.size(); ++e) {
    diff = std::max(diff, std::abs(a[e] - b[e]));
    scale = std::max(scale, std::abs(b[e]));
  }
  return scale > 0.0 ? diff / scale : diff;
}

}  // namespace barter::ref
