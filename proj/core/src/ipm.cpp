#include "barter/ipm.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace barter {
namespace {

using Vec = std::vector<double>;

std::size_t uz(int v) { return static_cast<std::size_t>(v); }

double inf_norm(const Vec& v) {
  double r = 0.0;
  for (double e : v) r = std::max(r, std::abs(e));
  return r;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void check_interior(const IpmProblem& pb, const IpmState& st) {
  for (std::size_t a = 0; a < pb.nv(); ++a) {
    if (!(st.x[a] > 0.0 && st.x[a] < pb.upper_v[a] && st.z_v[a] > 0.0 && st.w_v[a] > 0.0)) {
      throw std::domain_error("iterate is not strictly interior (v block)");
    }
  }
  for (std::size_t h = 0; h < pb.ns(); ++h) {
    if (!(st.s[h] > 0.0 && st.s[h] < pb.upper_s[h] && st.z_s[h] > 0.0 && st.w_s[h] > 0.0)) {
      throw std::domain_error("iterate is not strictly interior (s block)");
    }
  }
}

// Largest step in (0, 1] keeping value + step * delta inside (0, upper) (upper < 0 means none).
double max_step(const Vec& value, const Vec& delta, const Vec* upper, double limit) {
  double a = limit;
  for (std::size_t e = 0; e < value.size(); ++e) {
    if (delta[e] < 0.0) a = std::min(a, -value[e] / delta[e]);
    if (upper && delta[e] > 0.0) a = std::min(a, ((*upper)[e] - value[e]) / delta[e]);
  }
  return a;
}

void axpy(Vec& y, double a, const Vec& x) {
  for (std::size_t e = 0; e < y.size(); ++e) y[e] += a * x[e];
}

}  // namespace

IpmProblem IpmProblem::build(const EconomyInstance& inst, const IpmOptions& options) {
  require_valid(inst);
  IpmProblem pb;
  pb.n = inst.n_agents;
  pb.m = inst.n_commodities;
  pb.disagreement = options.disagreement_rows;
  for (const auto& p : inst.prices) pb.prices.push_back(p.to_double());
  for (const auto& d : inst.weights) pb.weights.push_back(d.to_double());
  pb.alpha = options.welfare_weights.empty() ? Vec(inst.n(), 1.0) : options.welfare_weights;
  if (pb.alpha.size() != inst.n()) throw std::invalid_argument("welfare weights must have one entry per agent");
  for (double a : pb.alpha) {
    if (!(a >= 0.0)) throw std::invalid_argument("welfare weights must be nonnegative");
  }
  for (const auto& r : budgets(inst)) pb.b.push_back(r.to_double());
  const auto supply = weighted_supply(inst);
  for (const auto& r : supply) pb.b.push_back(r.to_double());
  pb.utilities = inst.utilities;
  for (std::size_t h = 0; h < inst.n(); ++h) pb.u_ref.push_back(inst.utilities[h].value(inst.endowments.row(h)));

  if (options.upper_v) {
    if (options.upper_v->size() != pb.nv()) throw std::invalid_argument("upper_v must have nm + m entries");
    pb.upper_v = *options.upper_v;
  } else {
    pb.upper_v.resize(pb.nv());
    for (std::size_t h = 0; h < inst.n(); ++h) {
      for (std::size_t j = 0; j < inst.m(); ++j) {
        pb.upper_v[h * inst.m() + j] = (supply[j] / inst.weights[h]).to_double() + 1.0;
      }
    }
    for (std::size_t j = 0; j < inst.m(); ++j) pb.upper_v[inst.n() * inst.m() + j] = supply[j].to_double() + 1.0;
  }
  double scale = 1.0;
  for (double u : pb.u_ref) scale = std::max(scale, std::abs(u));
  pb.upper_s.assign(pb.ns(), options.upper_s.value_or(1e6 * scale));
  return pb;
}

double IpmProblem::agent_utility(int h, const Vec& v) const {
  return utilities[uz(h)].value(std::span<const double>(v.data() + uz(h) * uz(m), uz(m)));
}

Vec IpmProblem::agent_gradient(int h, const Vec& v) const {
  return utilities[uz(h)].gradient(std::span<const double>(v.data() + uz(h) * uz(m), uz(m)));
}

Vec IpmProblem::agent_hessian(int h, const Vec& v) const {
  return utilities[uz(h)].hessian_diagonal(std::span<const double>(v.data() + uz(h) * uz(m), uz(m)));
}

double IpmProblem::welfare(const Vec& v) const {
  double w = 0.0;
  for (int h = 0; h < n; ++h) w += alpha[uz(h)] * agent_utility(h, v);
  return w;
}

KktResiduals kkt_residuals(const IpmProblem& pb, const IpmState& st) {
  check_interior(pb, st);
  const std::size_t n = uz(pb.n);
  const std::size_t m = uz(pb.m);
  const std::size_t nv = pb.nv();
  const std::size_t ns = pb.ns();
  KktResiduals r;
  r.r1.assign(n + m, 0.0);
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t j = 0; j < m; ++j) {
      r.r1[h] += pb.prices[j] * st.x[h * m + j];
      r.r1[n + j] += pb.weights[h] * st.x[h * m + j];
    }
  }
  for (std::size_t j = 0; j < m; ++j) r.r1[n + j] += st.x[n * m + j];
  for (std::size_t e = 0; e < n + m; ++e) r.r1[e] -= pb.b[e];

  r.r2.assign(ns, 0.0);
  for (std::size_t h = 0; h < ns; ++h) r.r2[h] = pb.agent_utility(static_cast<int>(h), st.x) - pb.u_ref[h] - st.s[h];

  r.r3.assign(nv, 0.0);
  double grad_scale = 0.0;
  for (std::size_t h = 0; h < n; ++h) {
    const Vec g = pb.agent_gradient(static_cast<int>(h), st.x);
    const double coef = (ns ? st.t[h] : 0.0) - pb.alpha[h];
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t a = h * m + j;
      r.r3[a] = pb.prices[j] * st.y[h] + pb.weights[h] * st.y[n + j] + coef * g[j];
      grad_scale = std::max(grad_scale, std::abs(pb.alpha[h] * g[j]));
    }
  }
  for (std::size_t j = 0; j < m; ++j) r.r3[n * m + j] = st.y[n + j];
  for (std::size_t a = 0; a < nv; ++a) r.r3[a] += -st.z_v[a] + st.w_v[a];

  r.r4.assign(ns, 0.0);
  for (std::size_t h = 0; h < ns; ++h) r.r4[h] = -st.t[h] - st.z_s[h] + st.w_s[h];

  r.r5.resize(nv);
  r.r7.resize(nv);
  double comp = 0.0;
  for (std::size_t a = 0; a < nv; ++a) {
    r.r5[a] = st.x[a] * st.z_v[a] - st.mu;
    r.r7[a] = (pb.upper_v[a] - st.x[a]) * st.w_v[a] - st.mu;
    comp = std::max({comp, st.x[a] * st.z_v[a], (pb.upper_v[a] - st.x[a]) * st.w_v[a]});
  }
  r.r6.resize(ns);
  r.r8.resize(ns);
  for (std::size_t h = 0; h < ns; ++h) {
    r.r6[h] = st.s[h] * st.z_s[h] - st.mu;
    r.r8[h] = (pb.upper_s[h] - st.s[h]) * st.w_s[h] - st.mu;
    comp = std::max({comp, st.s[h] * st.z_s[h], (pb.upper_s[h] - st.s[h]) * st.w_s[h]});
  }
  const double b_scale = std::max(inf_norm(pb.b), inf_norm(pb.u_ref));
  r.primal = std::max(inf_norm(r.r1), inf_norm(r.r2)) / (1.0 + b_scale);
  r.dual = std::max(inf_norm(r.r3), inf_norm(r.r4)) / (1.0 + grad_scale);
  r.complementarity = comp / (1.0 + std::abs(pb.welfare(st.x)));
  return r;
}

namespace {

// State-dependent pieces of the reduced system; reused for every right-hand side.
struct StructuredFactor {
  Vec D;  // inverse of the eliminated primal diagonal
  Vec Ds;
  std::vector<Vec> grads;
  std::vector<Vec> hess;
  Vec beta;
  Vec gamma;
  Eigen::MatrixXd DP;
  Eigen::MatrixXd CU;
  Vec BU;
  Eigen::LLT<Eigen::MatrixXd> llt;
  Eigen::LDLT<Eigen::MatrixXd> ldlt;
  bool use_ldlt = false;
  std::int64_t regularized = 0;
};

StructuredFactor factor_structured(const IpmProblem& pb, const IpmState& st) {
  const std::size_t n = uz(pb.n);
  const std::size_t m = uz(pb.m);
  const std::size_t nv = pb.nv();
  const std::size_t ns = pb.ns();
  const double* P = pb.prices.data();
  StructuredFactor f;

  Vec M(nv);
  for (std::size_t a = 0; a < nv; ++a) M[a] = st.z_v[a] / st.x[a] + st.w_v[a] / (pb.upper_v[a] - st.x[a]);
  f.grads.resize(n);
  f.hess.resize(n);
  for (std::size_t h = 0; h < n; ++h) {
    f.grads[h] = pb.agent_gradient(static_cast<int>(h), st.x);
    f.hess[h] = pb.agent_hessian(static_cast<int>(h), st.x);
    const double coef = (ns ? st.t[h] : 0.0) - pb.alpha[h];
    for (std::size_t j = 0; j < m; ++j) M[h * m + j] += coef * f.hess[h][j];
  }
  for (auto& v : M) {
    if (!(v > 1e-14)) {
      v = 1e-14;
      ++f.regularized;
    }
  }
  f.D.resize(nv);
  for (std::size_t a = 0; a < nv; ++a) f.D[a] = 1.0 / M[a];
  f.Ds.resize(ns);
  for (std::size_t h = 0; h < ns; ++h) {
    f.Ds[h] = 1.0 / (st.z_s[h] / st.s[h] + st.w_s[h] / (pb.upper_s[h] - st.s[h]));
  }

  // Per-agent pieces: beta = P D_h P', gamma = P D_h g, DP = D_h P'.
  f.beta.assign(n, 0.0);
  f.gamma.assign(n, 0.0);
  Vec gdg(n, 0.0);
  f.DP.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t j = 0; j < m; ++j) {
      const double dj = f.D[h * m + j];
      f.DP(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(h)) = dj * P[j];
      f.beta[h] += P[j] * dj * P[j];
      if (ns) {
        f.gamma[h] += P[j] * dj * f.grads[h][j];
        gdg[h] += f.grads[h][j] * dj * f.grads[h][j];
      }
    }
  }

  // D_Upsilon = D_0 + sum_h d_h^2 (D_h - D_h P' P D_h / beta_h).
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(m));
  for (std::size_t j = 0; j < m; ++j) {
    double diag = f.D[n * m + j];
    for (std::size_t h = 0; h < n; ++h) diag += pb.weights[h] * pb.weights[h] * f.D[h * m + j];
    K(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j)) = diag;
  }
  for (std::size_t h = 0; h < n; ++h) {
    const auto col = f.DP.col(static_cast<Eigen::Index>(h));
    K.noalias() -= (pb.weights[h] * pb.weights[h] / f.beta[h]) * col * col.transpose();
  }

  // Disagreement block: C_Upsilon column h = d_h Upsilon_h g^h, B_Upsilon = g Upsilon g + D_s.
  f.CU.resize(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(ns));
  f.BU.resize(ns);
  for (std::size_t h = 0; h < ns; ++h) {
    for (std::size_t j = 0; j < m; ++j) {
      const double dg = f.D[h * m + j] * f.grads[h][j];
      f.CU(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(h)) =
          pb.weights[h] *
          (dg - f.DP(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(h)) * f.gamma[h] / f.beta[h]);
    }
    f.BU[h] = gdg[h] - f.gamma[h] * f.gamma[h] / f.beta[h] + f.Ds[h];
    const auto c = f.CU.col(static_cast<Eigen::Index>(h));
    K.noalias() -= c * c.transpose() / f.BU[h];
  }

  f.llt.compute(K);
  if (f.llt.info() != Eigen::Success) {
    f.ldlt.compute(K);
    f.use_ldlt = true;
    ++f.regularized;
  }
  return f;
}

// Solves J d = -R, where R holds the eight residual blocks.
NewtonDirection solve_structured(const IpmProblem& pb, const IpmState& st, const StructuredFactor& f,
                                 const KktResiduals& R) {
  const std::size_t n = uz(pb.n);
  const std::size_t m = uz(pb.m);
  const std::size_t nv = pb.nv();
  const std::size_t ns = pb.ns();
  const double* P = pb.prices.data();

  Vec rho(nv);
  for (std::size_t a = 0; a < nv; ++a) rho[a] = -R.r3[a] - R.r5[a] / st.x[a] + R.r7[a] / (pb.upper_v[a] - st.x[a]);
  Vec rho_s(ns);
  for (std::size_t h = 0; h < ns; ++h) {
    rho_s[h] = -R.r4[h] - R.r6[h] / st.s[h] + R.r8[h] / (pb.upper_s[h] - st.s[h]);
  }

  // Right-hand sides of the normal equations for (dy1, dy2, dt).
  Vec r1(n, 0.0);
  Vec r2(m, 0.0);
  Vec r3(ns, 0.0);
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t j = 0; j < m; ++j) {
      const double rt = f.D[h * m + j] * rho[h * m + j];
      r1[h] += P[j] * rt;
      r2[j] += pb.weights[h] * rt;
      if (ns) r3[h] += f.grads[h][j] * rt;
    }
    r1[h] += R.r1[h];
  }
  for (std::size_t j = 0; j < m; ++j) r2[j] += f.D[n * m + j] * rho[n * m + j] + R.r1[n + j];
  for (std::size_t h = 0; h < ns; ++h) r3[h] += R.r2[h] - f.Ds[h] * rho_s[h];

  Eigen::VectorXd rhs = Eigen::Map<const Eigen::VectorXd>(r2.data(), static_cast<Eigen::Index>(m));
  for (std::size_t h = 0; h < n; ++h) {
    rhs -= (pb.weights[h] * r1[h] / f.beta[h]) * f.DP.col(static_cast<Eigen::Index>(h));
  }
  Vec r3p(ns);
  for (std::size_t h = 0; h < ns; ++h) {
    r3p[h] = r3[h] - f.gamma[h] * r1[h] / f.beta[h];
    rhs -= f.CU.col(static_cast<Eigen::Index>(h)) * (r3p[h] / f.BU[h]);
  }
  const Eigen::VectorXd dy2 = f.use_ldlt ? Eigen::VectorXd(f.ldlt.solve(rhs)) : Eigen::VectorXd(f.llt.solve(rhs));

  NewtonDirection dir;
  dir.dt.assign(ns, 0.0);
  for (std::size_t h = 0; h < ns; ++h) {
    dir.dt[h] = (r3p[h] - f.CU.col(static_cast<Eigen::Index>(h)).dot(dy2)) / f.BU[h];
  }
  dir.dy.assign(n + m, 0.0);
  for (std::size_t j = 0; j < m; ++j) dir.dy[n + j] = dy2(static_cast<Eigen::Index>(j));
  for (std::size_t h = 0; h < n; ++h) {
    const double c0 = pb.weights[h] * f.DP.col(static_cast<Eigen::Index>(h)).dot(dy2);
    dir.dy[h] = (r1[h] - c0 - (ns ? f.gamma[h] * dir.dt[h] : 0.0)) / f.beta[h];
  }

  dir.dx.assign(nv, 0.0);
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t a = h * m + j;
      double aty = P[j] * dir.dy[h] + pb.weights[h] * dir.dy[n + j];
      if (ns) aty += f.grads[h][j] * dir.dt[h];
      dir.dx[a] = f.D[a] * (rho[a] - aty);
    }
  }
  for (std::size_t j = 0; j < m; ++j) dir.dx[n * m + j] = f.D[n * m + j] * (rho[n * m + j] - dir.dy[n + j]);

  dir.ds.assign(ns, 0.0);
  for (std::size_t h = 0; h < ns; ++h) dir.ds[h] = f.Ds[h] * (rho_s[h] + dir.dt[h]);

  dir.dz_v.resize(nv);
  dir.dw_v.resize(nv);
  for (std::size_t a = 0; a < nv; ++a) {
    dir.dz_v[a] = (-R.r5[a] - st.z_v[a] * dir.dx[a]) / st.x[a];
    dir.dw_v[a] = (-R.r7[a] + st.w_v[a] * dir.dx[a]) / (pb.upper_v[a] - st.x[a]);
  }
  dir.dz_s.resize(ns);
  dir.dw_s.resize(ns);
  for (std::size_t h = 0; h < ns; ++h) {
    dir.dz_s[h] = (-R.r6[h] - st.z_s[h] * dir.ds[h]) / st.s[h];
    dir.dw_s[h] = (-R.r8[h] + st.w_s[h] * dir.ds[h]) / (pb.upper_s[h] - st.s[h]);
  }
  return dir;
}

// R + J d for the full linearized system, accumulated in extended precision.
KktResiduals linear_residual(const IpmProblem& pb, const IpmState& st, const StructuredFactor& f,
                             const KktResiduals& R, const NewtonDirection& d) {
  using L = long double;
  const std::size_t n = uz(pb.n);
  const std::size_t m = uz(pb.m);
  const std::size_t nv = pb.nv();
  const std::size_t ns = pb.ns();
  KktResiduals out;
  std::vector<L> e1(R.r1.begin(), R.r1.end());
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t j = 0; j < m; ++j) {
      const L dx = d.dx[h * m + j];
      e1[h] += L(pb.prices[j]) * dx;
      e1[n + j] += L(pb.weights[h]) * dx;
    }
  }
  for (std::size_t j = 0; j < m; ++j) e1[n + j] += d.dx[n * m + j];
  out.r1.assign(e1.begin(), e1.end());

  out.r2.resize(ns);
  for (std::size_t h = 0; h < ns; ++h) {
    L acc = L(R.r2[h]) - L(d.ds[h]);
    for (std::size_t j = 0; j < m; ++j) acc += L(f.grads[h][j]) * L(d.dx[h * m + j]);
    out.r2[h] = static_cast<double>(acc);
  }

  out.r3.resize(nv);
  for (std::size_t h = 0; h < n; ++h) {
    const L coef = L(ns ? st.t[h] : 0.0) - L(pb.alpha[h]);
    for (std::size_t j = 0; j < m; ++j) {
      const std::size_t a = h * m + j;
      L acc = L(R.r3[a]) + coef * L(f.hess[h][j]) * L(d.dx[a]) + L(pb.prices[j]) * L(d.dy[h]) +
              L(pb.weights[h]) * L(d.dy[n + j]);
      if (ns) acc += L(f.grads[h][j]) * L(d.dt[h]);
      out.r3[a] = static_cast<double>(acc - L(d.dz_v[a]) + L(d.dw_v[a]));
    }
  }
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t a = n * m + j;
    out.r3[a] = static_cast<double>(L(R.r3[a]) + L(d.dy[n + j]) - L(d.dz_v[a]) + L(d.dw_v[a]));
  }

  out.r4.resize(ns);
  for (std::size_t h = 0; h < ns; ++h) {
    out.r4[h] = static_cast<double>(L(R.r4[h]) - L(d.dt[h]) - L(d.dz_s[h]) + L(d.dw_s[h]));
  }
  out.r5.resize(nv);
  out.r7.resize(nv);
  for (std::size_t a = 0; a < nv; ++a) {
    out.r5[a] = static_cast<double>(L(R.r5[a]) + L(st.z_v[a]) * L(d.dx[a]) + L(st.x[a]) * L(d.dz_v[a]));
    out.r7[a] = static_cast<double>(L(R.r7[a]) - L(st.w_v[a]) * L(d.dx[a]) +
                                    (L(pb.upper_v[a]) - L(st.x[a])) * L(d.dw_v[a]));
  }
  out.r6.resize(ns);
  out.r8.resize(ns);
  for (std::size_t h = 0; h < ns; ++h) {
    out.r6[h] = static_cast<double>(L(R.r6[h]) + L(st.z_s[h]) * L(d.ds[h]) + L(st.s[h]) * L(d.dz_s[h]));
    out.r8[h] = static_cast<double>(L(R.r8[h]) - L(st.w_s[h]) * L(d.ds[h]) +
                                    (L(pb.upper_s[h]) - L(st.s[h])) * L(d.dw_s[h]));
  }
  return out;
}

void add_into(NewtonDirection& d, const NewtonDirection& c) {
  axpy(d.dx, 1.0, c.dx);
  axpy(d.ds, 1.0, c.ds);
  axpy(d.dy, 1.0, c.dy);
  axpy(d.dt, 1.0, c.dt);
  axpy(d.dz_v, 1.0, c.dz_v);
  axpy(d.dw_v, 1.0, c.dw_v);
  axpy(d.dz_s, 1.0, c.dz_s);
  axpy(d.dw_s, 1.0, c.dw_s);
}

double max_block(const KktResiduals& r) {
  double v = 0.0;
  for (const auto* b : {&r.r1, &r.r2, &r.r3, &r.r4, &r.r5, &r.r6, &r.r7, &r.r8}) v = std::max(v, inf_norm(*b));
  return v;
}

}  // namespace

NewtonDirection newton_direction_structured(const IpmProblem& pb, const IpmState& st, StructuredStats* stats) {
  const KktResiduals F = kkt_residuals(pb, st);
  const StructuredFactor f = factor_structured(pb, st);
  if (stats) {
    ++stats->core_factorizations;
    stats->core_dimension = pb.m;
    stats->regularizations += f.regularized;
  }
  NewtonDirection dir = solve_structured(pb, st, f, F);
  // Late iterates are badly scaled (bound duals grow like 1/mu), so refine against the full
  // linearized system, reusing the single core factorization.
  KktResiduals res = linear_residual(pb, st, f, F, dir);
  double norm = max_block(res);
  for (int sweep = 0; sweep < 3 && norm > 0.0; ++sweep) {
    NewtonDirection next = dir;
    add_into(next, solve_structured(pb, st, f, res));
    KktResiduals next_res = linear_residual(pb, st, f, F, next);
    const double next_norm = max_block(next_res);
    if (!(next_norm < norm)) break;
    dir = std::move(next);
    res = std::move(next_res);
    norm = next_norm;
  }
  return dir;
}

IpmState initial_state(const IpmProblem& pb) {
  const std::size_t n = uz(pb.n);
  const std::size_t m = uz(pb.m);
  const std::size_t nv = pb.nv();
  const std::size_t ns = pb.ns();
  IpmState st;
  st.x.assign(nv, 0.0);
  double dsum = 0.0;
  for (double d : pb.weights) dsum += d;
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t j = 0; j < m; ++j) {
      const double u = pb.upper_v[h * m + j];
      const double share = pb.b[n + j] / dsum;
      st.x[h * m + j] = std::clamp(share, 0.1 * u, 0.9 * u);
    }
  }
  for (std::size_t j = 0; j < m; ++j) st.x[n * m + j] = std::min(0.5, 0.5 * pb.upper_v[n * m + j]);
  st.s.assign(ns, 0.0);
  for (std::size_t h = 0; h < ns; ++h) {
    const double gap = pb.agent_utility(static_cast<int>(h), st.x) - pb.u_ref[h];
    st.s[h] = std::clamp(std::abs(gap), 1.0, 0.5 * pb.upper_s[h]);
  }
  st.y.assign(n + m, 0.0);
  st.t.assign(ns, 0.0);
  // Bound duals split the objective gradient so the dual residual starts small.
  st.z_v.assign(nv, 1.0);
  st.w_v.assign(nv, 1.0);
  for (std::size_t h = 0; h < n; ++h) {
    const Vec g = pb.agent_gradient(static_cast<int>(h), st.x);
    for (std::size_t j = 0; j < m; ++j) {
      const double obj = pb.alpha[h] * g[j];
      st.w_v[h * m + j] = 1.0 + std::max(0.0, obj);
      st.z_v[h * m + j] = 1.0 + std::max(0.0, -obj);
    }
  }
  st.z_s.assign(ns, 1.0);
  st.w_s.assign(ns, 1.0);
  double acc = 0.0;
  std::size_t cnt = 0;
  for (std::size_t a = 0; a < nv; ++a) {
    acc += st.x[a] * st.z_v[a] + (pb.upper_v[a] - st.x[a]) * st.w_v[a];
    cnt += 2;
  }
  for (std::size_t h = 0; h < ns; ++h) {
    acc += st.s[h] * st.z_s[h] + (pb.upper_s[h] - st.s[h]) * st.w_s[h];
    cnt += 2;
  }
  st.mu = acc / static_cast<double>(cnt);
  return st;
}

IpmResult run_ipm(const EconomyInstance& inst, const IpmOptions& options) {
  const IpmProblem pb = IpmProblem::build(inst, options);
  const std::size_t n = uz(pb.n);
  const std::size_t m = uz(pb.m);
  const std::size_t nv = pb.nv();
  const std::size_t ns = pb.ns();
  IpmResult res;
  IpmState st = initial_state(pb);

  auto average_gap = [&](const IpmState& s) {
    double acc = 0.0;
    for (std::size_t a = 0; a < nv; ++a) acc += s.x[a] * s.z_v[a] + (pb.upper_v[a] - s.x[a]) * s.w_v[a];
    for (std::size_t h = 0; h < ns; ++h) acc += s.s[h] * s.z_s[h] + (pb.upper_s[h] - s.s[h]) * s.w_s[h];
    return acc / static_cast<double>(2 * (nv + ns));
  };

  for (int it = 0; it <= options.max_iterations; ++it) {
    st.mu = average_gap(st);
    KktResiduals r = kkt_residuals(pb, st);
    IpmTraceRow row{it, st.mu, r.primal, r.dual, r.complementarity, pb.welfare(st.x), 0.0};
    res.residuals = r;
    res.iterations = it;
    if (r.primal <= options.tolerance && r.dual <= options.tolerance && r.complementarity <= options.tolerance) {
      res.converged = true;
      res.trace.push_back(row);
      break;
    }
    if (it == options.max_iterations) {
      res.trace.push_back(row);
      break;
    }
    st.mu *= options.sigma;
    NewtonDirection dir = newton_direction_structured(pb, st, &res.stats);
    if (options.on_direction) options.on_direction(pb, st, dir);

    double a = 1.0 / options.step_fraction;
    a = max_step(st.x, dir.dx, &pb.upper_v, a);
    a = max_step(st.s, dir.ds, &pb.upper_s, a);
    a = max_step(st.z_v, dir.dz_v, nullptr, a);
    a = max_step(st.w_v, dir.dw_v, nullptr, a);
    a = max_step(st.z_s, dir.dz_s, nullptr, a);
    a = max_step(st.w_s, dir.dw_s, nullptr, a);
    a = std::min(1.0, options.step_fraction * a);
    row.step = a;
    res.trace.push_back(row);

    axpy(st.x, a, dir.dx);
    axpy(st.s, a, dir.ds);
    axpy(st.y, a, dir.dy);
    axpy(st.t, a, dir.dt);
    axpy(st.z_v, a, dir.dz_v);
    axpy(st.w_v, a, dir.dw_v);
    axpy(st.z_s, a, dir.dz_s);
    axpy(st.w_s, a, dir.dw_s);
  }
  if (res.stats.regularizations > 0) {
    res.notes.push_back("regularized " + std::to_string(res.stats.regularizations) + " pivots");
  }
  res.state = st;
  res.allocation = RealMatrix(n, m);
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t j = 0; j < m; ++j) res.allocation(h, j) = st.x[h * m + j];
  }
  res.linking_slack.assign(st.x.begin() + static_cast<std::ptrdiff_t>(n * m), st.x.end());
  res.welfare = pb.welfare(st.x);
  return res;
}

std::string ipm_trace_csv(const IpmResult& result) {
  std::ostringstream os;
  os << "iteration,mu,primal,dual,complementarity,welfare,step\n";
  for (const auto& r : result.trace) {
    os << r.iteration << ',' << fmt(r.mu) << ',' << fmt(r.primal) << ',' << fmt(r.dual) << ','
       << fmt(r.complementarity) << ',' << fmt(r.welfare) << ',' << fmt(r.step) << '\n';
  }
  return os.str();
}

}  // namespace barter
