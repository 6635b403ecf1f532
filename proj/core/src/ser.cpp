#include "barter/ser.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace barter {
namespace {

std::size_t uz(int v) { return static_cast<std::size_t>(v); }

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::int64_t abs64(std::int64_t v) { return v < 0 ? -v : v; }

bool prefer_alpha(std::int64_t a, std::int64_t b) {
  return abs64(a) != abs64(b) ? abs64(a) < abs64(b) : a < b;
}

// Welfare after a move along dir, given the current utility vector.
double welfare_after(const EconomyInstance& inst, const Allocation& x, std::span<const double> u,
                     const ERDirection& dir, std::int64_t alpha, Criterion kind, std::vector<double>& scratch) {
  scratch.assign(u.begin(), u.end());
  scratch[uz(dir.h)] = line_utility(inst, dir.h, x, dir, alpha);
  scratch[uz(dir.k)] = line_utility(inst, dir.k, x, dir, alpha);
  return welfare(scratch, kind);
}

Criterion welfare_measure(Criterion kind) {
  return (kind == Criterion::kFrontierCount || kind == Criterion::kMarginalRate) ? Criterion::kSum : kind;
}

// Integer step length maximizing the given welfare measure; ties keep the smallest |alpha|.
std::pair<std::int64_t, double> best_welfare_step(const EconomyInstance& inst, const Allocation& x,
                                                  std::span<const double> u, const ERDirection& dir,
                                                  const StepInterval& range, Criterion kind) {
  std::vector<double> scratch;
  auto w = [&](std::int64_t a) { return welfare_after(inst, x, u, dir, a, kind, scratch); };
  std::int64_t best = 0;
  double best_w = w(0);
  auto consider = [&](std::int64_t a) {
    if (!range.contains(a)) return;
    double v = w(a);
    if (v > best_w || (v == best_w && prefer_alpha(a, best))) {
      best = a;
      best_w = v;
    }
  };
  const bool lin = inst.utilities[uz(dir.h)].is_linear() && inst.utilities[uz(dir.k)].is_linear();
  if (kind == Criterion::kSum && lin) {
    consider(range.lo_int);
    consider(range.hi_int);
    return {best, best_w};
  }
  if (kind == Criterion::kSum) {
    // Sum of two concave functions of alpha is concave: integer ternary search.
    std::int64_t lo = range.lo_int;
    std::int64_t hi = range.hi_int;
    while (hi - lo > 2) {
      std::int64_t m1 = lo + (hi - lo) / 3;
      std::int64_t m2 = hi - (hi - lo) / 3;
      if (w(m1) < w(m2)) {
        lo = m1 + 1;
      } else {
        hi = m2;
      }
    }
    for (std::int64_t a = lo; a <= hi; ++a) consider(a);
    return {best, best_w};
  }
  // Norm welfare is not concave in general: scan the interval.
  for (std::int64_t a = range.lo_int; a <= range.hi_int; ++a) consider(a);
  return {best, best_w};
}

double marginal_rate_score(const EconomyInstance& inst, const Allocation& x, const ERDirection& dir) {
  constexpr double kFloor = 1e-12;
  const double log_price = std::log(inst.prices[uz(dir.i)].to_double() / inst.prices[uz(dir.j)].to_double());
  double acc = 0.0;
  for (int agent : {dir.h, dir.k}) {
    const auto& u = inst.utilities[uz(agent)];
    double gi = u.marginal(uz(dir.i), static_cast<double>(x(uz(agent), uz(dir.i))));
    double gj = u.marginal(uz(dir.j), static_cast<double>(x(uz(agent), uz(dir.j))));
    acc += std::abs(std::log((gi + kFloor) / (gj + kFloor)) - log_price);
  }
  return 0.5 * acc;
}

std::int64_t frontier_count(const EconomyInstance& inst, const Allocation& x, const ERDirection& dir,
                            const StepInterval& range) {
  auto pts = pareto_frontier(inst, x, dir, range, FrontierRule::kArgmaxSegment);
  return std::count_if(pts.begin(), pts.end(), [](const FrontierPoint& p) { return p.alpha != 0; });
}

double score_for(const EconomyInstance& inst, const Allocation& x, std::span<const double> u,
                 const ERDirection& dir, const StepInterval& range, Criterion criterion, std::int64_t alpha) {
  switch (criterion) {
    case Criterion::kFrontierCount:
      return static_cast<double>(frontier_count(inst, x, dir, range));
    case Criterion::kMarginalRate:
      return marginal_rate_score(inst, x, dir);
    default: {
      std::vector<double> scratch;
      return welfare_after(inst, x, u, dir, alpha, criterion, scratch) - welfare(u, criterion);
    }
  }
}

void record_move(const EconomyInstance& inst, TradeLog& log, const ERDirection& dir, std::int64_t alpha,
                 std::int64_t t, std::vector<double> u) {
  TradeEvent ev;
  ev.t = t;
  ev.h = dir.h;
  ev.k = dir.k;
  ev.i = dir.i;
  ev.j = dir.j;
  ev.alpha = alpha;
  ev.utilities = std::move(u);
  ev.traded_value = traded_value(inst, dir, alpha);
  log.interaction(uz(dir.h), uz(dir.k)) += 1;
  log.interaction(uz(dir.k), uz(dir.h)) += 1;
  log.flow(uz(dir.h), uz(dir.k)) += ev.traded_value;
  log.flow(uz(dir.k), uz(dir.h)) += ev.traded_value;
  log.events.push_back(std::move(ev));
}

}  // namespace

std::vector<ERDirection> candidate_directions(const EconomyInstance& inst) {
  std::vector<ERDirection> out;
  for (int h = 0; h < inst.n_agents; ++h) {
    for (int k = h + 1; k < inst.n_agents; ++k) {
      for (int i = 0; i < inst.n_commodities; ++i) {
        for (int j = i + 1; j < inst.n_commodities; ++j) out.push_back(direction(inst, h, k, i, j));
      }
    }
  }
  return out;
}

std::vector<ERDirection> order_candidates(std::vector<ERDirection> candidates, std::uint64_t seed) {
  if (seed == 0) return candidates;
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit index draw keeps the permutation identical across standard libraries.
  for (std::size_t idx = candidates.size(); idx > 1; --idx) {
    std::size_t r = static_cast<std::size_t>(rng() % idx);
    std::swap(candidates[idx - 1], candidates[r]);
  }
  return candidates;
}

double welfare(std::span<const double> u, Criterion kind) {
  double acc = 0.0;
  switch (kind) {
    case Criterion::kL1Norm:
      for (double v : u) acc += std::abs(v);
      return acc;
    case Criterion::kL2Norm:
      for (double v : u) acc += v * v;
      return std::sqrt(acc);
    case Criterion::kLinfNorm:
      for (double v : u) acc = std::max(acc, std::abs(v));
      return acc;
    default:
      for (double v : u) acc += v;
      return acc;
  }
}

double traded_value(const EconomyInstance& inst, const ERDirection& dir, std::int64_t alpha) {
  Rational given;
  const std::array<int, 4> com{dir.i, dir.j, dir.i, dir.j};
  for (std::size_t e = 0; e < 4; ++e) {
    std::int64_t delta = alpha * dir.step[e];
    if (delta < 0) given += inst.prices[uz(com[e])] * Rational(-delta);
  }
  return given.to_double();
}

Proposal propose(const EconomyInstance& inst, const Allocation& x, std::span<const double> u,
                 const ERDirection& dir, const SearchConfig& config) {
  Proposal p;
  const StepInterval range = step_interval(inst, x, dir);
  if (range.lo_int == 0 && range.hi_int == 0) return p;
  if (config.objective == Objective::kBilateralPareto) {
    auto pts = pareto_frontier(inst, x, dir, range, FrontierRule::kExact);
    const FrontierPoint* best = nullptr;
    for (const auto& fp : pts) {
      if (fp.alpha == 0) continue;
      if (!best || fp.u_h + fp.u_k > best->u_h + best->u_k ||
          (fp.u_h + fp.u_k == best->u_h + best->u_k && prefer_alpha(fp.alpha, best->alpha))) {
        best = &fp;
      }
    }
    if (!best) return p;
    p.accept = true;
    p.alpha = best->alpha;
  } else {
    const Criterion measure = welfare_measure(config.welfare_kind);
    auto [alpha, w] = best_welfare_step(inst, x, u, dir, range, measure);
    if (alpha == 0 || !(w > welfare(u, measure))) return p;
    p.accept = true;
    p.alpha = alpha;
  }
  if (config.mode == SearchMode::kBestImprove) {
    p.score = score_for(inst, x, u, dir, range, config.welfare_kind, p.alpha);
  }
  return p;
}

double selection_score(const EconomyInstance& inst, const Allocation& x, const ERDirection& dir,
                       Criterion criterion) {
  const StepInterval range = step_interval(inst, x, dir);
  const auto u = utilities(inst, x);
  switch (criterion) {
    case Criterion::kFrontierCount:
      return static_cast<double>(frontier_count(inst, x, dir, range));
    case Criterion::kMarginalRate:
      return marginal_rate_score(inst, x, dir);
    case Criterion::kSum:
    case Criterion::kL1Norm:
    case Criterion::kL2Norm:
    case Criterion::kLinfNorm: {
      auto [alpha, w] = best_welfare_step(inst, x, u, dir, range, criterion);
      return alpha == 0 ? 0.0 : std::max(0.0, w - welfare(u, criterion));
    }
  }
  throw std::invalid_argument("unknown selection criterion");
}

SerResult run_ser(const EconomyInstance& inst, const SearchConfig& config) {
  require_valid(inst);
  auto cands = order_candidates(candidate_directions(inst), config.order_seed);
  return run_ser(inst, config, cands);
}

SerResult run_ser(const EconomyInstance& inst, const SearchConfig& config, std::span<const ERDirection> candidates) {
  require_valid(inst);
  const std::size_t n_cand = candidates.size();
  SerResult res;
  res.final_allocation = inst.endowments;
  Allocation& x = res.final_allocation;
  TradeLog& log = res.log;
  log.interaction = IntMatrix(inst.n(), inst.n(), 0);
  log.flow = RealMatrix(inst.n(), inst.n(), 0.0);
  log.neighborhood_size = static_cast<std::int64_t>(n_cand);
  res.lyapunov.bound = lyapunov_bound(inst);

  std::vector<double> u = utilities(inst, x);
  res.lyapunov.values.push_back(welfare(u, Criterion::kSum));

  auto accept = [&](const ERDirection& dir, std::int64_t alpha) {
    dir.apply(x, alpha);
    u[uz(dir.h)] = inst.utilities[uz(dir.h)].value(x.row(uz(dir.h)));
    u[uz(dir.k)] = inst.utilities[uz(dir.k)].value(x.row(uz(dir.k)));
    ++log.erps_solved;
    record_move(inst, log, dir, alpha, log.erps_solved, u);
    double w = welfare(u, Criterion::kSum);
    res.lyapunov.deltas.push_back(w - res.lyapunov.values.back());
    res.lyapunov.values.push_back(w);
  };

  if (n_cand == 0) {
    res.converged = true;
  } else if (config.mode == SearchMode::kFirstImprove) {
    std::size_t ptr = 0;
    std::size_t idle = 0;
    while (true) {
      if (log.erps_solved >= config.max_iterations) break;
      const ERDirection& dir = candidates[ptr];
      ptr = (ptr + 1) % n_cand;
      ++log.candidates_examined;
      Proposal p = propose(inst, x, u, dir, config);
      if (p.accept) {
        accept(dir, p.alpha);
        idle = 0;
      } else if (++idle == n_cand) {
        res.converged = true;
        break;
      }
    }
  } else {
    while (true) {
      if (log.erps_solved >= config.max_iterations) break;
      const ERDirection* best = nullptr;
      Proposal best_p;
      for (const auto& dir : candidates) {
        ++log.candidates_examined;
        Proposal p = propose(inst, x, u, dir, config);
        if (!p.accept) continue;
        bool better = !best || p.score > best_p.score;
        if (best && p.score == best_p.score) {
          auto key = std::tie(dir.h, dir.k, dir.i, dir.j);
          auto best_key = std::tie(best->h, best->k, best->i, best->j);
          better = key < best_key || (key == best_key && prefer_alpha(p.alpha, best_p.alpha));
        }
        if (better) {
          best = &dir;
          best_p = p;
        }
      }
      if (!best) {
        res.converged = true;
        break;
      }
      accept(*best, best_p.alpha);
    }
  }
  const double denom = static_cast<double>(n_cand) * static_cast<double>(std::max<std::int64_t>(1, log.erps_solved));
  log.neighborhood_explored = n_cand == 0 ? 0.0 : static_cast<double>(log.candidates_examined) / denom;
  return res;
}

double lyapunov_bound(const EconomyInstance& inst) {
  auto supply = total_supply(inst);
  std::int64_t qmax = supply.empty() ? 0 : *std::max_element(supply.begin(), supply.end());
  Rational pmin = *std::min_element(inst.prices.begin(), inst.prices.end());
  Rational dmin = *std::min_element(inst.weights.begin(), inst.weights.end());
  Rational dmax = *std::max_element(inst.weights.begin(), inst.weights.end());
  return (Rational(qmax) / pmin * dmax / dmin).to_double();
}

bool check_delta_bound(const EconomyInstance& inst, const LyapunovSeries& series) {
  for (const auto& u : inst.utilities) {
    if (!u.is_linear()) throw std::invalid_argument("delta bound requires linear utilities");
    for (const auto& c : u.linear) {
      if (c > Rational(1)) throw std::invalid_argument("delta bound requires utility coefficients <= 1");
    }
  }
  for (const auto& p : inst.prices) {
    if (p > Rational(1)) throw std::invalid_argument("delta bound requires prices <= 1");
  }
  const double bound = lyapunov_bound(inst);
  const double slack = 1e-9 * std::max(1.0, bound);
  return std::all_of(series.deltas.begin(), series.deltas.end(), [&](double d) { return d <= bound + slack; });
}

Allocation replay(const EconomyInstance& inst, const TradeLog& log) {
  Allocation x = inst.endowments;
  for (const auto& ev : log.events) direction(inst, ev.h, ev.k, ev.i, ev.j).apply(x, ev.alpha);
  return x;
}

std::string trade_log_csv(const TradeLog& log) {
  std::ostringstream os;
  os << "t,h,k,i,j,alpha";
  const std::size_t n = log.interaction.rows();
  for (std::size_t a = 0; a < n; ++a) os << ",u" << (a + 1);
  os << '\n';
  for (const auto& ev : log.events) {
    os << ev.t << ',' << ev.h << ',' << ev.k << ',' << ev.i << ',' << ev.j << ',' << ev.alpha;
    for (double v : ev.utilities) os << ',' << fmt_double(v);
    os << '\n';
  }
  return os.str();
}

std::string trade_log_json(const TradeLog& log) {
  nlohmann::json j;
  j["erps_solved"] = log.erps_solved;
  j["candidates_examined"] = log.candidates_examined;
  j["neighborhood_size"] = log.neighborhood_size;
  j["neighborhood_explored"] = log.neighborhood_explored;
  nlohmann::json evs = nlohmann::json::array();
  for (const auto& ev : log.events) {
    evs.push_back({{"t", ev.t},
                   {"h", ev.h},
                   {"k", ev.k},
                   {"i", ev.i},
                   {"j", ev.j},
                   {"alpha", ev.alpha},
                   {"utilities", ev.utilities},
                   {"traded_value", ev.traded_value}});
  }
  j["events"] = evs;
  nlohmann::json inter = nlohmann::json::array();
  nlohmann::json flow = nlohmann::json::array();
  for (std::size_t r = 0; r < log.interaction.rows(); ++r) {
    auto ir = log.interaction.row(r);
    auto fr = log.flow.row(r);
    inter.push_back(std::vector<std::int64_t>(ir.begin(), ir.end()));
    flow.push_back(std::vector<double>(fr.begin(), fr.end()));
  }
  j["interaction"] = inter;
  j["flow"] = flow;
  return j.dump(2);
}

std::string lyapunov_csv(const LyapunovSeries& series) {
  std::ostringstream os;
  os << "t,U,delta,bound\n";
  for (std::size_t t = 0; t < series.values.size(); ++t) {
    os << t << ',' << fmt_double(series.values[t]) << ',';
    if (t > 0) os << fmt_double(series.deltas[t - 1]);
    os << ',' << fmt_double(series.bound) << '\n';
  }
  return os.str();
}

}  // namespace barter
