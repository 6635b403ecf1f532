#include "barter/erp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <numeric>
#include <stdexcept>

namespace barter {
namespace {

std::size_t uz(int v) { return static_cast<std::size_t>(v); }

// Integer argmax interval of one agent over [range.lo_int, range.hi_int].
struct ArgmaxInterval {
  std::int64_t lo;
  std::int64_t hi;
};

Rational linear_slope(const EconomyInstance& inst, int agent, const ERDirection& dir) {
  const auto& c = inst.utilities[uz(agent)].linear;
  auto s = dir.agent_step(agent);
  return c[uz(dir.i)] * Rational(s[0]) + c[uz(dir.j)] * Rational(s[1]);
}

ArgmaxInterval integer_argmax(const EconomyInstance& inst, int agent, const Allocation& x, const ERDirection& dir,
                              const StepInterval& range) {
  const auto& u = inst.utilities[uz(agent)];
  if (u.is_linear()) {
    int sgn = linear_slope(inst, agent, dir).sign();
    if (sgn > 0) return {range.hi_int, range.hi_int};
    if (sgn < 0) return {range.lo_int, range.lo_int};
    return {range.lo_int, range.hi_int};
  }
  double a = continuous_argmax(inst, agent, x, dir, range);
  auto f = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::floor(a)), range.lo_int, range.hi_int);
  auto c = std::clamp<std::int64_t>(static_cast<std::int64_t>(std::ceil(a)), range.lo_int, range.hi_int);
  if (f == c) return {f, f};
  double gf = line_utility(inst, agent, x, dir, f);
  double gc = line_utility(inst, agent, x, dir, c);
  if (gf > gc) return {f, f};
  if (gc > gf) return {c, c};
  return {f, c};
}

FrontierPoint evaluate(const EconomyInstance& inst, const Allocation& x, const ERDirection& dir, std::int64_t a) {
  return {a, line_utility(inst, dir.h, x, dir, a), line_utility(inst, dir.k, x, dir, a)};
}

bool closer_to_zero(std::int64_t a, std::int64_t b) {
  auto aa = a < 0 ? -a : a;
  auto ab = b < 0 ? -b : b;
  return aa != ab ? aa < ab : a < b;
}

// Individually rational, nondominated subset; equal utility pairs keep the alpha closest to 0.
std::vector<FrontierPoint> rational_nondominated(std::vector<FrontierPoint> pts, const FrontierPoint& origin) {
  std::vector<FrontierPoint> ir;
  ir.reserve(pts.size() + 1);
  bool has_origin = false;
  for (const auto& p : pts) {
    if (p.alpha == 0) has_origin = true;
    if (p.u_h >= origin.u_h && p.u_k >= origin.u_k) ir.push_back(p);
  }
  if (!has_origin) ir.push_back(origin);
  std::sort(ir.begin(), ir.end(), [](const FrontierPoint& a, const FrontierPoint& b) {
    if (a.u_h != b.u_h) return a.u_h > b.u_h;
    if (a.u_k != b.u_k) return a.u_k > b.u_k;
    return closer_to_zero(a.alpha, b.alpha);
  });
  std::vector<FrontierPoint> out;
  double best_k = -std::numeric_limits<double>::infinity();
  for (std::size_t idx = 0; idx < ir.size(); ++idx) {
    const auto& p = ir[idx];
    if (idx > 0 && p.u_h == ir[idx - 1].u_h && p.u_k == ir[idx - 1].u_k) continue;
    if (p.u_k > best_k) {
      out.push_back(p);
      best_k = p.u_k;
    }
  }
  std::sort(out.begin(), out.end(), [](const FrontierPoint& a, const FrontierPoint& b) { return a.alpha < b.alpha; });
  return out;
}

std::vector<FrontierPoint> exact_frontier(const EconomyInstance& inst, const Allocation& x, const ERDirection& dir,
                                          const StepInterval& range) {
  const FrontierPoint origin{0, line_utility(inst, dir.h, x, dir, std::int64_t{0}),
                            line_utility(inst, dir.k, x, dir, std::int64_t{0})};
  if (range.lo_int == range.hi_int) return {origin};
  auto ih = integer_argmax(inst, dir.h, x, dir, range);
  auto ik = integer_argmax(inst, dir.k, x, dir, range);
  std::int64_t seg_lo;
  std::int64_t seg_hi;
  if (std::max(ih.lo, ik.lo) <= std::min(ih.hi, ik.hi)) {
    std::int64_t lo = std::max(ih.lo, ik.lo);
    std::int64_t hi = std::min(ih.hi, ik.hi);
    std::int64_t pick = lo > 0 ? lo : (hi < 0 ? hi : 0);
    seg_lo = seg_hi = pick;
  } else if (ih.hi < ik.lo) {
    seg_lo = ih.hi;
    seg_hi = ik.lo;
  } else {
    seg_lo = ik.hi;
    seg_hi = ih.lo;
  }
  if (seg_lo <= 0 && 0 <= seg_hi) return {origin};
  std::vector<FrontierPoint> pts;
  pts.reserve(static_cast<std::size_t>(seg_hi - seg_lo + 1));
  for (std::int64_t a = seg_lo; a <= seg_hi; ++a) pts.push_back(evaluate(inst, x, dir, a));
  return rational_nondominated(std::move(pts), origin);
}

std::vector<FrontierPoint> sign_test_frontier(const EconomyInstance& inst, const Allocation& x,
                                              const ERDirection& dir, const StepInterval& range) {
  // Zero slope counts as neutral: the agent accepts any step length.
  int sh = linear_slope(inst, dir.h, dir).sign();
  int sk = linear_slope(inst, dir.k, dir).sign();
  std::int64_t a = 0;
  if (sh >= 0 && sk >= 0 && (sh > 0 || sk > 0)) a = range.hi_int;
  if (sh <= 0 && sk <= 0 && (sh < 0 || sk < 0)) a = range.lo_int;
  return {evaluate(inst, x, dir, a)};
}

std::vector<FrontierPoint> segment_frontier(const EconomyInstance& inst, const Allocation& x, const ERDirection& dir,
                                            const StepInterval& range) {
  const FrontierPoint origin = evaluate(inst, x, dir, 0);
  double ah = continuous_argmax(inst, dir.h, x, dir, range);
  double ak = continuous_argmax(inst, dir.k, x, dir, range);
  double down = std::min(ah, ak);
  double up = std::max(ah, ak);
  if (down <= 0.0 && 0.0 <= up) return {origin};
  auto lo = std::max<std::int64_t>(static_cast<std::int64_t>(std::ceil(down)), range.lo_int);
  auto hi = std::min<std::int64_t>(static_cast<std::int64_t>(std::floor(up)), range.hi_int);
  std::vector<FrontierPoint> pts;
  if (lo <= hi) {
    for (std::int64_t a = lo; a <= hi; ++a) {
      auto p = evaluate(inst, x, dir, a);
      if (p.u_h >= origin.u_h && p.u_k >= origin.u_k) pts.push_back(p);
    }
    if (pts.empty()) return {origin};
    return pts;
  }
  // No integer strictly between the argmaxes: compare the neighbouring integers with alpha = 0.
  std::vector<std::int64_t> cand;
  if (down > 0.0) {
    cand = {static_cast<std::int64_t>(std::floor(down)), static_cast<std::int64_t>(std::ceil(up))};
  } else {
    cand = {static_cast<std::int64_t>(std::ceil(up)), static_cast<std::int64_t>(std::floor(down))};
  }
  for (auto a : cand) {
    if (a != 0 && range.contains(a)) pts.push_back(evaluate(inst, x, dir, a));
  }
  return rational_nondominated(std::move(pts), origin);
}

}  // namespace

std::array<std::int64_t, 2> ERDirection::agent_step(int agent) const {
  if (agent == h) return {step[0], step[1]};
  if (agent == k) return {step[2], step[3]};
  throw std::invalid_argument("agent does not take part in this direction");
}

void ERDirection::apply(Allocation& x, std::int64_t alpha) const {
  x(uz(h), uz(i)) += alpha * step[0];
  x(uz(h), uz(j)) += alpha * step[1];
  x(uz(k), uz(i)) += alpha * step[2];
  x(uz(k), uz(j)) += alpha * step[3];
}

Allocation ERDirection::applied(const Allocation& x, std::int64_t alpha) const {
  Allocation y = x;
  apply(y, alpha);
  return y;
}

Rational g_factor(std::span<const Rational> v) {
  if (v.empty()) throw std::invalid_argument("g_factor of an empty vector");
  std::int64_t l = 1;
  for (const auto& r : v) {
    if (r.is_zero()) throw std::invalid_argument("g_factor requires nonzero entries");
    l = std::lcm(l, r.den());
  }
  std::int64_t g = 0;
  for (const auto& r : v) {
    Rational scaled = r.abs() * Rational(l);
    g = std::gcd(g, scaled.num());
  }
  return Rational(l, g);
}

ERDirection direction(const EconomyInstance& inst, int h, int k, int i, int j) {
  if (h == k) throw std::invalid_argument("direction requires two distinct agents");
  if (i == j) throw std::invalid_argument("direction requires two distinct commodities");
  if (h < 0 || k < 0 || h >= inst.n_agents || k >= inst.n_agents) throw std::out_of_range("agent index out of range");
  if (i < 0 || j < 0 || i >= inst.n_commodities || j >= inst.n_commodities) {
    throw std::out_of_range("commodity index out of range");
  }
  ERDirection d;
  d.h = h;
  d.k = k;
  d.i = i;
  d.j = j;
  const auto& p = inst.prices;
  const auto& w = inst.weights;
  d.raw = {p[uz(j)] * w[uz(k)], -(p[uz(i)] * w[uz(k)]), -(p[uz(j)] * w[uz(h)]), p[uz(i)] * w[uz(h)]};
  d.factor = g_factor(d.raw);
  for (std::size_t e = 0; e < 4; ++e) {
    Rational s = d.raw[e] * d.factor;
    if (!s.is_integer()) throw std::logic_error("scaled direction is not integral");
    d.step[e] = s.num();
  }
  return d;
}

StepInterval step_interval(const EconomyInstance& inst, const Allocation& x, const ERDirection& dir) {
  std::optional<Rational> lo;
  std::optional<Rational> hi;
  auto raise_lo = [&](const Rational& v) { lo = lo ? max(*lo, v) : v; };
  auto lower_hi = [&](const Rational& v) { hi = hi ? min(*hi, v) : v; };

  const std::array<std::pair<int, int>, 4> coords{{{dir.h, dir.i}, {dir.h, dir.j}, {dir.k, dir.i}, {dir.k, dir.j}}};
  for (std::size_t e = 0; e < 4; ++e) {
    const auto [agent, com] = coords[e];
    const std::int64_t s = dir.step[e];
    const std::int64_t v = x(uz(agent), uz(com));
    if (s > 0) {
      raise_lo(Rational(-v, s));
    } else {
      lower_hi(Rational(v, -s));
    }
    auto cap_bound = [&](std::int64_t cap) {
      if (s > 0) {
        lower_hi(Rational(cap - v, s));
      } else {
        raise_lo(Rational(cap - v, s));
      }
    };
    if (inst.capacities) cap_bound((*inst.capacities)(uz(agent), uz(com)));
    if (inst.rationing) {
      const auto l = inst.rationing->lower[uz(com)];
      const auto u = inst.rationing->upper[uz(com)];
      if (s > 0) {
        raise_lo(Rational(l, s));
        lower_hi(Rational(u, s));
      } else {
        raise_lo(Rational(u, s));
        lower_hi(Rational(l, s));
      }
    }
  }
  StepInterval r;
  r.lo = lo.value_or(Rational(0));
  r.hi = hi.value_or(Rational(0));
  r.lo_int = r.lo.ceil();
  r.hi_int = r.hi.floor();
  return r;
}

double line_utility(const EconomyInstance& inst, int agent, const Allocation& x, const ERDirection& dir,
                    std::int64_t alpha) {
  auto s = dir.agent_step(agent);
  const auto& u = inst.utilities[uz(agent)];
  auto src = x.row(uz(agent));
  std::int64_t buf[64];
  std::vector<std::int64_t> heap;
  std::int64_t* row = buf;
  if (src.size() > 64) {
    heap.resize(src.size());
    row = heap.data();
  }
  std::copy(src.begin(), src.end(), row);
  row[uz(dir.i)] += alpha * s[0];
  row[uz(dir.j)] += alpha * s[1];
  return u.value(std::span<const std::int64_t>(row, src.size()));
}

double line_utility(const EconomyInstance& inst, int agent, const Allocation& x, const ERDirection& dir,
                    double alpha) {
  auto s = dir.agent_step(agent);
  auto src = x.row(uz(agent));
  std::vector<double> row(src.begin(), src.end());
  row[uz(dir.i)] += alpha * static_cast<double>(s[0]);
  row[uz(dir.j)] += alpha * static_cast<double>(s[1]);
  return inst.utilities[uz(agent)].value(row);
}

double ternary_search_max(const std::function<double(double)>& f, double lo, double hi, double tol) {
  return ternary_search_max([&](double a, double b) { return f(a) < f(b); }, lo, hi, tol);
}

double ternary_search_max(const std::function<bool(double, double)>& less, double lo, double hi, double tol) {
  while (hi - lo > tol) {
    double m1 = lo + (hi - lo) / 3.0;
    double m2 = hi - (hi - lo) / 3.0;
    if (less(m1, m2)) {
      lo = m1;
    } else {
      hi = m2;
    }
  }
  return 0.5 * (lo + hi);
}

double continuous_argmax(const EconomyInstance& inst, int agent, const Allocation& x, const ERDirection& dir,
                         ArgmaxMethod method) {
  return continuous_argmax(inst, agent, x, dir, step_interval(inst, x, dir), method);
}

double continuous_argmax(const EconomyInstance& inst, int agent, const Allocation& x, const ERDirection& dir,
                         const StepInterval& range, ArgmaxMethod method) {
  const auto& u = inst.utilities[uz(agent)];
  const double lo = range.lo.to_double();
  const double hi = range.hi.to_double();
  if (u.is_linear()) {
    int sgn = linear_slope(inst, agent, dir).sign();
    return sgn > 0 ? hi : (sgn < 0 ? lo : 0.0);
  }
  auto s = dir.agent_step(agent);
  if (method == ArgmaxMethod::kTernary) {
    // Utilities near the maximizer agree to ~1e-12, so compare through the difference
    // u(a) - u(b) = sum_c -exp(-a_c(x_c + b s_c)) * expm1(-a_c s_c (a - b)), which keeps full precision.
    const std::array<int, 2> cols{dir.i, dir.j};
    auto less = [&](double a, double b) {
      double diff = 0.0;
      for (std::size_t t = 0; t < 2; ++t) {
        const double ac = u.cara[uz(cols[t])];
        const double sc = static_cast<double>(s[t]);
        const double xc = static_cast<double>(x(uz(agent), uz(cols[t])));
        diff -= std::exp(-ac * (xc + b * sc)) * std::expm1(-ac * sc * (a - b));
      }
      return diff < 0.0;
    };
    return ternary_search_max(less, lo, hi);
  }
  // Stationarity of s_p a_p exp(-a_p(x_p + t s_p)) + s_n a_n exp(-a_n(x_n + t s_n)) in t,
  // where p is the commodity with the positive entry.
  int cp = dir.i;
  int cn = dir.j;
  double sp = static_cast<double>(s[0]);
  double sn = static_cast<double>(s[1]);
  if (sp < 0) {
    std::swap(cp, cn);
    std::swap(sp, sn);
  }
  const double ap = u.cara[uz(cp)];
  const double an = u.cara[uz(cn)];
  const double xp = static_cast<double>(x(uz(agent), uz(cp)));
  const double xn = static_cast<double>(x(uz(agent), uz(cn)));
  const double num = std::log(ap * sp) - ap * xp - std::log(-an * sn) + an * xn;
  const double den = ap * sp - an * sn;
  return std::clamp(num / den, lo, hi);
}

std::vector<FrontierPoint> pareto_frontier(const EconomyInstance& inst, const Allocation& x, const ERDirection& dir,
                                           FrontierRule rule) {
  return pareto_frontier(inst, x, dir, step_interval(inst, x, dir), rule);
}

std::vector<FrontierPoint> pareto_frontier(const EconomyInstance& inst, const Allocation& x, const ERDirection& dir,
                                           const StepInterval& range, FrontierRule rule) {
  if (rule == FrontierRule::kExact) return exact_frontier(inst, x, dir, range);
  const bool lh = inst.utilities[uz(dir.h)].is_linear();
  const bool lk = inst.utilities[uz(dir.k)].is_linear();
  if (lh && lk) return sign_test_frontier(inst, x, dir, range);
  if (!lh && !lk) return segment_frontier(inst, x, dir, range);
  return exact_frontier(inst, x, dir, range);
}

}  // namespace barter
