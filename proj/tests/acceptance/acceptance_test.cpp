// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit when any criterion fails.

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "barter/erp.hpp"
#include "barter/experiment.hpp"
#include "barter/ipm.hpp"
#include "barter/netstats.hpp"
#include "barter/network.hpp"
#include "barter/oracle.hpp"
#include "barter/pareto.hpp"
#include "barter/ser.hpp"
#include "barter/simplex.hpp"
#include "oracles.hpp"

using namespace barter;

namespace {

struct Outcome {
  bool pass = true;
  std::vector<std::string> details;

  void check(bool ok, const std::string& what) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "ok: " : "FAILED: ") + what);
  }
  void note(const std::string& what) { details.push_back("note: " + what); }
};

std::string num(double v, int prec = 6) {
  std::ostringstream os;
  os.precision(prec);
  os << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Allocation rows3(std::initializer_list<std::int64_t> v) {
  std::vector<std::int64_t> d(v);
  Allocation x(3, 3, 0);
  std::copy(d.begin(), d.end(), x.data().begin());
  return x;
}

SearchConfig make_config(SearchMode mode, Objective objective, std::uint64_t order_seed = 0) {
  SearchConfig c;
  c.mode = mode;
  c.objective = objective;
  c.order_seed = order_seed;
  return c;
}

// ---------------------------------------------------------------------------------------
// 1. Two-agent CARA pair: direction, continuous argmaxes, segment frontier.
Outcome cara_pair() {
  constexpr double kArgmaxTol = 0.01;
  constexpr double kValueTol = 1e-3;
  constexpr double kTimeLimit = 1.0;
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto inst = cara_pair_instance();
  const auto dir = direction(inst, 0, 1, 0, 1);
  o.check(dir.step == std::array<std::int64_t, 4>{12, -6, -10, 5}, "direction (12,-6,-10,5)");
  const double a1 = continuous_argmax(inst, 0, inst.endowments, dir);
  const double a2 = continuous_argmax(inst, 1, inst.endowments, dir);
  o.check(std::abs(a1 - 3.33) <= kArgmaxTol, "agent 1 argmax " + num(a1) + " vs 3.33 +-0.01");
  o.check(std::abs(a2 - 8.94) <= kArgmaxTol, "agent 2 argmax " + num(a2) + " vs 8.94 +-0.01");
  const auto seg = pareto_frontier(inst, inst.endowments, dir, FrontierRule::kArgmaxSegment);
  o.check(ref::alphas(seg) == std::vector<std::int64_t>{4, 5, 6, 7, 8}, "segment frontier alpha in {4..8}");
  const double g1[] = {1.82412, 1.81803, 1.80882, 1.79752, 1.78465};
  const double g2[] = {1.93043, 1.94035, 1.94873, 1.95558, 1.96057};
  double worst = 0.0;
  for (std::size_t e = 0; e < seg.size() && e < 5; ++e) {
    worst = std::max({worst, std::abs(seg[e].u_h - g1[e]), std::abs(seg[e].u_k - g2[e])});
  }
  o.check(seg.size() == 5 && worst <= kValueTol, "five utility pairs within 1e-3 (worst " + num(worst, 3) + ")");
  const auto exact = pareto_frontier(inst, inst.endowments, dir, FrontierRule::kExact);
  std::ostringstream ex;
  for (auto a : ref::alphas(exact)) ex << a << ' ';
  o.note("exact frontier alphas: " + ex.str());
  const double secs = seconds_since(t0);
  o.check(secs < kTimeLimit, "runtime " + num(secs, 3) + " s < 1 s");
  return o;
}

// ---------------------------------------------------------------------------------------
// 2. Three-agent worked example and its enumerated waves.
struct PrintedRow {
  int wave;
  Allocation x;
  UtilityVector u;
};

std::vector<PrintedRow> printed_rows() {
  return {
      {2, rows3({24, 0, 0, 7, 7, 58, 22, 2, 2}), {1800, 571, 1220}},
      {2, rows3({19, 5, 0, 10, 4, 58, 24, 0, 2}), {1480, 574, 1326}},
      {2, rows3({21, 3, 0, 8, 6, 58, 24, 0, 2}), {1608, 572, 1326}},
      {2, rows3({21, 3, 0, 8, 4, 60, 24, 2, 0}), {1608, 584, 1324}},
      {2, rows3({21, 3, 0, 10, 6, 56, 22, 0, 4}), {1422, 567, 1430}},
      {2, rows3({21, 0, 3, 8, 7, 57, 24, 2, 0}), {1614, 566, 1324}},
      {3, rows3({21, 3, 0, 8, 4, 60, 24, 2, 0}), {1608, 584, 1324}},
      {3, rows3({22, 2, 0, 7, 7, 58, 24, 0, 2}), {1672, 571, 1326}},
      {3, rows3({24, 0, 0, 5, 9, 58, 24, 0, 2}), {1800, 569, 1326}},
      {3, rows3({24, 0, 0, 5, 7, 60, 24, 2, 0}), {1800, 581, 1324}},
      {3, rows3({24, 0, 0, 7, 9, 56, 22, 0, 4}), {1614, 564, 1430}},
      {3, rows3({19, 5, 0, 8, 4, 60, 26, 0, 0}), {1480, 584, 1430}},
      {3, rows3({19, 5, 0, 10, 2, 60, 24, 2, 0}), {1480, 586, 1324}},
      {3, rows3({21, 1, 2, 8, 6, 58, 24, 2, 0}), {1608, 582, 1430}},
      {4, rows3({21, 3, 0, 8, 4, 60, 24, 2, 0}), {1608, 584, 1324}},
      {4, rows3({24, 0, 0, 5, 7, 60, 24, 2, 0}), {1800, 581, 1324}},
      {4, rows3({19, 5, 0, 8, 4, 60, 26, 0, 0}), {1480, 584, 1430}},
      {4, rows3({19, 5, 0, 10, 2, 60, 24, 2, 0}), {1480, 586, 1324}},
      {4, rows3({21, 1, 2, 8, 6, 58, 24, 2, 0}), {1608, 582, 1430}},
      {4, rows3({21, 3, 0, 8, 6, 58, 24, 0, 2}), {1800, 579, 1430}},
      {4, rows3({22, 0, 2, 7, 9, 56, 24, 0, 2}), {1672, 581, 1430}},
      {4, rows3({24, 0, 0, 7, 7, 58, 22, 2, 2}), {1736, 582, 1324}},
      {4, rows3({20, 2, 2, 7, 7, 58, 26, 0, 0}), {1672, 583, 1324}},
      {5, rows3({21, 3, 0, 8, 4, 60, 24, 2, 0}), {1608, 584, 1324}},
      {5, rows3({24, 0, 0, 5, 7, 60, 24, 2, 0}), {1800, 581, 1324}},
      {5, rows3({19, 5, 0, 8, 4, 60, 26, 0, 0}), {1480, 584, 1430}},
      {5, rows3({19, 5, 0, 10, 2, 60, 24, 2, 0}), {1480, 586, 1324}},
      {5, rows3({21, 1, 2, 8, 6, 58, 24, 2, 0}), {1608, 582, 1430}},
      {5, rows3({21, 3, 0, 8, 6, 58, 24, 0, 2}), {1800, 579, 1430}},
      {5, rows3({22, 0, 2, 7, 9, 56, 24, 0, 2}), {1672, 581, 1430}},
      {5, rows3({24, 0, 0, 7, 7, 58, 22, 2, 2}), {1736, 582, 1324}},
      {5, rows3({20, 2, 2, 7, 7, 58, 26, 0, 0}), {1672, 583, 1324}},
      {5, rows3({21, 0, 3, 8, 7, 57, 24, 2, 0}), {1544, 583, 1430}},
  };
}

Outcome worked_example() {
  constexpr double kTimeLimit = 10.0;
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  const auto inst = worked_example_instance();
  o.check(utilities(inst, inst.endowments) == UtilityVector{1422, 559, 1220}, "initial utilities (1422,559,1220)");

  const auto res = enumerate_paths(inst);
  if (res.waves.size() < 2) {
    o.check(false, "enumeration produced a first wave");
    return o;
  }
  std::set<std::vector<std::int64_t>> got;
  for (const auto& a : res.waves[1].allocations) got.insert({a.data().begin(), a.data().end()});
  const std::set<std::vector<std::int64_t>> want{{21, 3, 0, 10, 4, 58, 22, 2, 2}, {18, 3, 3, 11, 4, 57, 24, 2, 0}};
  std::set<UtilityVector> gu(res.waves[1].utilities.begin(), res.waves[1].utilities.end());
  o.check(got == want && gu == std::set<UtilityVector>{{1608, 574, 1220}, {1422, 569, 1324}},
          "first wave equals the two listed allocations and utility vectors");

  const auto rows = printed_rows();
  int infeasible = 0;
  int dominated = 0;
  int mismatched = 0;
  for (const auto& r : rows) {
    if (!is_feasible(inst, r.x)) ++infeasible;
    for (const auto& other : rows) {
      if (other.wave == r.wave && dominates(other.u, r.u)) {
        ++dominated;
        break;
      }
    }
    if (utilities(inst, r.x) != r.u) ++mismatched;
  }
  o.check(infeasible == 0, "listed rows of waves 2-5 feasible (" + std::to_string(infeasible) + " infeasible)");
  o.check(dominated == 0, "listed rows nondominated within their wave (" + std::to_string(dominated) + " dominated)");
  o.note(std::to_string(mismatched) + " of " + std::to_string(rows.size()) +
         " listed utility vectors differ from the utilities of their listed allocation");

  const auto terminal = res.terminal.utility_count();
  o.check(res.stabilized && (terminal == 10 || terminal == 11),
          "terminal frontier has " + std::to_string(terminal) + " distinct vectors (reference count 11)");
  const double secs = seconds_since(t0);
  o.check(secs < kTimeLimit, "runtime " + num(secs, 3) + " s < 10 s");
  return o;
}

// ---------------------------------------------------------------------------------------
// 3. Frontier construction against brute-force dominance.
Outcome frontier_oracle() {
  constexpr int kInstances = 500;
  constexpr std::int64_t kMaxWidth = 60;
  Outcome o;
  std::mt19937_64 rng(3001);
  int mismatches = 0;
  int segment_differs = 0;
  int done = 0;
  int cara = 0;
  while (done < kInstances) {
    const bool use_cara = done % 2 == 0;
    const int n = static_cast<int>(ref::rand_int(rng, 2, 4));
    const int m = static_cast<int>(ref::rand_int(rng, 2, 4));
    auto inst = ref::random_instance(rng, {.n = n, .m = m, .cara = use_cara, .max_endowment = 30});
    const int h = static_cast<int>(ref::rand_int(rng, 0, n - 2));
    const int k = static_cast<int>(ref::rand_int(rng, h + 1, n - 1));
    const int i = static_cast<int>(ref::rand_int(rng, 0, m - 2));
    const int j = static_cast<int>(ref::rand_int(rng, i + 1, m - 1));
    const auto dir = direction(inst, h, k, i, j);
    const auto range = step_interval(inst, inst.endowments, dir);
    if (range.width() > kMaxWidth) continue;
    ++done;
    cara += use_cara ? 1 : 0;
    const auto exact = ref::alphas(pareto_frontier(inst, inst.endowments, dir, range, FrontierRule::kExact));
    const auto brute = ref::alphas(ref::brute_force_frontier(inst, inst.endowments, dir));
    if (exact != brute) ++mismatches;
    if (ref::alphas(pareto_frontier(inst, inst.endowments, dir, range, FrontierRule::kArgmaxSegment)) != brute) {
      ++segment_differs;
    }
  }
  o.check(mismatches == 0, std::to_string(kInstances) + " instances (" + std::to_string(cara) +
                               " cara), exact frontier equals brute force in all but " + std::to_string(mismatches));
  o.note("argmax-segment rule differs from brute force on " + std::to_string(segment_differs) + " instances");
  return o;
}

// ---------------------------------------------------------------------------------------
// 4. Pareto filter against the all-pairs filter.
Outcome pareto_filter_oracle() {
  constexpr int kSets = 1000;
  Outcome o;
  std::mt19937_64 rng(4001);
  int mismatches = 0;
  for (int t = 0; t < kSets; ++t) {
    const auto r = static_cast<std::size_t>(ref::rand_int(rng, 1, 200));
    const auto dim = static_cast<std::size_t>(ref::rand_int(rng, 1, 6));
    const auto levels = ref::rand_int(rng, 2, 15);
    VectorSet vs(r);
    for (auto& v : vs)
      for (std::size_t e = 0; e < dim; ++e) v.push_back(static_cast<double>(ref::rand_int(rng, 0, levels)));
    auto got = pareto_filter_indices(vs);
    std::sort(got.begin(), got.end());
    if (got != ref::naive_pareto_indices(vs)) ++mismatches;
  }
  o.check(mismatches == 0, std::to_string(kSets) + " sets, " + std::to_string(mismatches) + " mismatches");
  return o;
}

// ---------------------------------------------------------------------------------------
// 5. Local-search fixed points and the welfare optimum.
Outcome ser_fixed_points() {
  constexpr int kInstances = 100;
  constexpr double kWelfareSlack = 1e-9;
  Outcome o;
  std::mt19937_64 rng(5001);
  int converged = 0;
  int uncertified = 0;
  int compared = 0;
  int above_optimum = 0;
  int attained = 0;
  for (int t = 0; t < kInstances; ++t) {
    const bool small = t % 2 == 0;
    const int n = static_cast<int>(small ? ref::rand_int(rng, 2, 4) : ref::rand_int(rng, 2, 6));
    const int m = static_cast<int>(small ? ref::rand_int(rng, 2, 4) : ref::rand_int(rng, 2, 6));
    const bool linear = t % 4 != 3;
    auto inst = ref::random_instance(rng, {.n = n, .m = m, .cara = !linear, .max_endowment = 12});
    const Objective objective = t % 3 == 0 ? Objective::kBilateralPareto : Objective::kWelfare;
    const SearchMode mode = t % 5 < 2 ? SearchMode::kBestImprove : SearchMode::kFirstImprove;
    const auto res = run_ser(inst, make_config(mode, objective, t % 2 ? 0 : 100 + static_cast<std::uint64_t>(t)));
    if (!res.converged) continue;
    ++converged;
    if (ref::has_improving_move(inst, res.final_allocation, objective)) ++uncertified;
    if (objective == Objective::kWelfare && linear && n <= 4 && m <= 4) {
      const auto bnb = branch_and_bound_linear(inst);
      const double opt = bnb.welfare.to_double();
      double w = 0.0;
      for (double u : utilities(inst, res.final_allocation)) w += u;
      ++compared;
      if (w > opt + kWelfareSlack * (1.0 + std::abs(opt))) ++above_optimum;
      if (std::abs(w - opt) <= kWelfareSlack * (1.0 + std::abs(opt))) ++attained;
    }
  }
  o.check(uncertified == 0, std::to_string(converged) + " converged runs, " + std::to_string(uncertified) +
                                " with an improving move left");
  o.check(compared > 0 && above_optimum == 0, std::to_string(compared) + " welfare runs vs branch and bound, " +
                                                  std::to_string(above_optimum) + " above the optimum");
  o.note("optimum attained in " + std::to_string(attained) + " of " + std::to_string(compared) + " runs");
  return o;
}

// ---------------------------------------------------------------------------------------
// 6. Allocation count against the stars-and-bars bound.
Outcome allocation_count() {
  constexpr int kInstances = 300;
  constexpr int kMinApplicable = 100;
  Outcome o;
  const BigInt limit(100000);
  std::mt19937_64 rng(6001);
  int applicable = 0;
  int violations = 0;
  for (int t = 0; t < kInstances; ++t) {
    const int n = static_cast<int>(ref::rand_int(rng, 2, 4));
    const int m = static_cast<int>(ref::rand_int(rng, 1, 3));
    auto inst = ref::random_instance(rng, {.n = n, .m = m, .unit_weights = true, .max_endowment = 4});
    if (allocation_count_bound(inst) > limit) continue;
    ++applicable;
    const auto res = enumerate_allocations(inst, limit);
    if (BigInt(res.count) > res.bound) ++violations;
  }
  o.check(applicable >= kMinApplicable && violations == 0,
          std::to_string(applicable) + " instances with bound <= 1e5, " + std::to_string(violations) + " violations");
  return o;
}

// ---------------------------------------------------------------------------------------
// 7. CARA utility along a direction changes direction at most once.
Outcome unimodality() {
  constexpr int kTrials = 500;
  constexpr double kZero = 1e-12;
  Outcome o;
  std::mt19937_64 rng(7001);
  int violations = 0;
  for (int t = 0; t < kTrials; ++t) {
    const int n = static_cast<int>(ref::rand_int(rng, 2, 4));
    const int m = static_cast<int>(ref::rand_int(rng, 2, 4));
    auto inst = ref::random_instance(rng, {.n = n, .m = m, .cara = true, .max_endowment = 40});
    const int h = static_cast<int>(ref::rand_int(rng, 0, n - 2));
    const int k = static_cast<int>(ref::rand_int(rng, h + 1, n - 1));
    const int i = static_cast<int>(ref::rand_int(rng, 0, m - 2));
    const int j = static_cast<int>(ref::rand_int(rng, i + 1, m - 1));
    const auto dir = direction(inst, h, k, i, j);
    const auto range = step_interval(inst, inst.endowments, dir);
    for (int agent : {h, k}) {
      int changes = 0;
      int last = 0;
      double prev = line_utility(inst, agent, inst.endowments, dir, range.lo_int);
      for (std::int64_t a = range.lo_int + 1; a <= range.hi_int; ++a) {
        const double cur = line_utility(inst, agent, inst.endowments, dir, a);
        const double d = cur - prev;
        prev = cur;
        const int s = std::abs(d) <= kZero * std::max(1.0, std::abs(cur)) ? 0 : (d > 0 ? 1 : -1);
        if (s == 0) continue;
        if (last != 0 && s != last) ++changes;
        if (last == -1 && s == 1) changes += 10;  // a rise after a fall is never allowed
        last = s;
      }
      if (changes > 1) ++violations;
    }
  }
  o.check(violations == 0, std::to_string(kTrials) + " trials, " + std::to_string(violations) + " violations");
  return o;
}

// ---------------------------------------------------------------------------------------
// 8. Welfare increments under normalized linear economies.
Outcome lyapunov() {
  constexpr int kRuns = 200;
  Outcome o;
  std::mt19937_64 rng(8001);
  int violations = 0;
  double worst_ratio = 0.0;
  std::int64_t steps = 0;
  for (int t = 0; t < kRuns; ++t) {
    EconomyInstance inst;
    inst.n_agents = static_cast<int>(ref::rand_int(rng, 2, 5));
    inst.n_commodities = static_cast<int>(ref::rand_int(rng, 2, 4));
    const auto n = static_cast<std::size_t>(inst.n_agents);
    const auto m = static_cast<std::size_t>(inst.n_commodities);
    for (std::size_t j = 0; j < m; ++j) inst.prices.emplace_back(ref::rand_int(rng, 1, 6), 6);
    inst.prices[0] = Rational(1);  // numeraire
    inst.weights.assign(n, Rational(1));
    inst.endowments = IntMatrix(n, m, 0);
    for (auto& v : inst.endowments.data()) v = ref::rand_int(rng, 0, 20);
    for (std::size_t h = 0; h < n; ++h) {
      std::vector<Rational> c;
      for (std::size_t j = 0; j < m; ++j) c.emplace_back(ref::rand_int(rng, 0, 10), 10);
      inst.utilities.push_back(UtilitySpec::Linear(c));
    }
    const auto res = run_ser(inst, make_config(t % 2 ? SearchMode::kFirstImprove : SearchMode::kBestImprove,
                                               t % 3 ? Objective::kWelfare : Objective::kBilateralPareto));
    if (!check_delta_bound(inst, res.lyapunov)) ++violations;
    const double bound = lyapunov_bound(inst);
    for (double d : res.lyapunov.deltas) worst_ratio = std::max(worst_ratio, d / bound);
    steps += static_cast<std::int64_t>(res.lyapunov.deltas.size());
  }
  o.check(violations == 0, std::to_string(kRuns) + " runs (" + std::to_string(steps) + " steps), " +
                               std::to_string(violations) + " with a step above the bound");
  o.note("largest step / bound = " + num(worst_ratio, 4));
  return o;
}

// ---------------------------------------------------------------------------------------
// 9. Interior-point method.
Outcome interior_point() {
  constexpr double kDirectionTol = 1e-8;
  constexpr double kKktTol = 1e-6;
  constexpr double kLpTol = 1e-6;
  constexpr double kLpSolveTol = 1e-10;
  Outcome o;
  std::mt19937_64 rng(9001);

  struct Case {
    int n;
    int m;
    bool cara;
    bool mixed;
  };
  const std::vector<Case> cases{{2, 2, true, false},  {2, 2, false, false}, {3, 3, true, false},
                                {3, 3, true, true},   {4, 5, false, false}, {5, 4, true, false},
                                {6, 6, true, true},   {10, 4, true, false}, {4, 10, false, false},
                                {8, 8, false, false}, {10, 10, true, true}, {10, 10, true, false}};
  std::int64_t iterations = 0;
  std::int64_t off = 0;
  double worst = 0.0;
  int not_converged = 0;
  double worst_kkt = 0.0;
  for (const auto& c : cases) {
    auto inst = ref::random_instance(rng, {.n = c.n, .m = c.m, .cara = c.cara, .mixed = c.mixed, .max_endowment = 15});
    IpmOptions opt;
    opt.on_direction = [&](const IpmProblem& pb, const IpmState& st, const NewtonDirection& d) {
      const double gap = ref::relative_gap(ref::flatten(d), ref::flatten(ref::dense_newton_direction(pb, st)));
      ++iterations;
      worst = std::max(worst, gap);
      if (gap > kDirectionTol) ++off;
    };
    const auto res = run_ipm(inst, opt);
    if (!res.converged) ++not_converged;
    worst_kkt = std::max({worst_kkt, res.residuals.primal, res.residuals.dual, res.residuals.complementarity});
  }
  o.check(off == 0, "structured vs dense direction within 1e-8 on " + std::to_string(iterations - off) + " of " +
                        std::to_string(iterations) + " iterations (worst " + num(worst, 3) + ")");
  o.check(not_converged == 0 && worst_kkt <= kKktTol,
          std::to_string(cases.size() - static_cast<std::size_t>(not_converged)) + " of " +
              std::to_string(cases.size()) + " solves reach KKT <= 1e-6 (worst " + num(worst_kkt, 3) + ")");

  int lp_mismatch = 0;
  int below_integer = 0;
  int lp_runs = 0;
  double worst_lp = 0.0;
  for (int t = 0; t < 20; ++t) {
    const int n = static_cast<int>(ref::rand_int(rng, 2, 4));
    const int m = static_cast<int>(ref::rand_int(rng, 2, 4));
    auto inst = ref::random_instance(rng, {.n = n, .m = m, .max_endowment = 12});
    for (bool ir : {false, true}) {
      // The barrier leaves a duality gap of about (#variables * mu), so the value match runs the solver to a
      // tighter stopping tolerance than the 1e-6 residual requirement.
      IpmOptions opt;
      opt.disagreement_rows = ir;
      opt.tolerance = kLpSolveTol;
      const auto res = run_ipm(inst, opt);
      const auto lp = solve_lp(relaxation_lp(inst, linear_welfare_matrix(inst), ir));
      ++lp_runs;
      const double rel = std::abs(res.welfare - lp.value) / (1.0 + std::abs(lp.value));
      worst_lp = std::max(worst_lp, rel);
      const double kkt = std::max({res.residuals.primal, res.residuals.dual, res.residuals.complementarity});
      if (lp.status != LpStatus::kOptimal || kkt > kKktTol || rel > kLpTol) ++lp_mismatch;
      BnbOptions bo;
      bo.individual_rationality = ir;
      const double best = branch_and_bound_linear(inst, bo).welfare.to_double();
      if (res.welfare < best - kLpTol * (1.0 + std::abs(best))) ++below_integer;
    }
  }
  o.check(lp_mismatch == 0, std::to_string(lp_runs) + " linear solves match the branch-and-bound LP within 1e-6 (" +
                                std::to_string(lp_mismatch) + " off, worst " + num(worst_lp, 3) + ")");

  // CARA instances: the relaxation must sit above every integer allocation the local search finds. Pareto moves
  // keep every agent above its endowment, welfare moves need not, so each is paired with the matching relaxation.
  for (int t = 0; t < 10; ++t) {
    auto inst = ref::random_instance(rng, {.n = 3, .m = 3, .cara = true, .max_endowment = 12});
    IpmOptions no_ir;
    no_ir.disagreement_rows = false;
    const double with_rows = run_ipm(inst).welfare;
    const double without_rows = run_ipm(inst, no_ir).welfare;
    for (auto mode : {SearchMode::kFirstImprove, SearchMode::kBestImprove}) {
      for (auto objective : {Objective::kBilateralPareto, Objective::kWelfare}) {
        const auto ser = run_ser(inst, make_config(mode, objective));
        double w = 0.0;
        for (double u : utilities(inst, ser.final_allocation)) w += u;
        const double bound = objective == Objective::kBilateralPareto ? with_rows : without_rows;
        if (bound < w - kLpTol * (1.0 + std::abs(w))) ++below_integer;
      }
    }
  }
  const auto pair = cara_pair_instance();
  const auto pres = run_ipm(pair);
  const auto dir = direction(pair, 0, 1, 0, 1);
  for (std::int64_t a = 4; a <= 8; ++a) {
    const double w = line_utility(pair, 0, pair.endowments, dir, a) + line_utility(pair, 1, pair.endowments, dir, a);
    if (pres.welfare < w - kLpTol) ++below_integer;
  }
  o.check(below_integer == 0, "relaxation welfare >= best integer welfare (" + std::to_string(below_integer) +
                                  " violations)");
  return o;
}

// ---------------------------------------------------------------------------------------
// 10. Growth of best-improve ERP counts with size.
Outcome scaling() {
  constexpr double kMinR2 = 0.9;
  constexpr double kBetaLo = 1.5;
  constexpr double kBetaHi = 2.6;
  constexpr double kTimeLimit = 300.0;
  Outcome o;
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentSpec spec;
  spec.kind = ExperimentKind::kScaling;
  for (int s = 6; s <= 20; ++s) spec.sizes.push_back(s);
  spec.replicates = 3;
  spec.seed = 2024;
  spec.mode = SearchMode::kBestImprove;
  const auto rep = run_experiment(spec);
  std::vector<std::pair<double, double>> pts;
  std::istringstream is(rep.tables.at("scaling.csv"));
  std::string line;
  std::getline(is, line);
  while (std::getline(is, line)) {
    std::istringstream ls(line);
    std::string size, replicate, seed, erps;
    std::getline(ls, size, ',');
    std::getline(ls, replicate, ',');
    std::getline(ls, seed, ',');
    std::getline(ls, erps, ',');
    pts.emplace_back(std::stod(size), std::stod(erps));
  }
  const auto fit = fit_curve(pts, CurveFamily::kPower);
  const auto efit = fit_curve(pts, CurveFamily::kExponential);
  const double secs = seconds_since(t0);
  o.check(fit.r_squared >= kMinR2, "power fit R^2 = " + num(fit.r_squared, 4) + " >= 0.9");
  o.check(fit.beta1 >= kBetaLo && fit.beta1 <= kBetaHi, "power exponent " + num(fit.beta1, 4) + " in [1.5, 2.6]");
  o.note("exponential fit beta1 = " + num(efit.beta1, 4) + ", R^2 = " + num(efit.r_squared, 4));
  o.check(secs < kTimeLimit, "runtime " + num(secs, 3) + " s < 300 s");
  return o;
}

// ---------------------------------------------------------------------------------------
// 11. Network-restricted search.
Outcome network_variant() {
  constexpr int kInstances = 40;
  Outcome o;
  std::mt19937_64 rng(11001);
  int log_mismatch = 0;
  int unbalanced = 0;
  int over_capacity = 0;
  int runs = 0;
  for (int t = 0; t < kInstances; ++t) {
    const int n = static_cast<int>(ref::rand_int(rng, 3, 6));
    const int m = static_cast<int>(ref::rand_int(rng, 2, 4));
    auto inst = ref::random_instance(rng, {.n = n, .m = m, .cara = t % 2 == 0, .mixed = t % 3 == 0,
                                           .max_endowment = 12, .max_weight = 3});
    const auto cfg = make_config(t % 2 ? SearchMode::kFirstImprove : SearchMode::kBestImprove,
                                 t % 3 ? Objective::kBilateralPareto : Objective::kWelfare,
                                 t % 4 ? 0 : 500 + static_cast<std::uint64_t>(t));
    const auto plain = run_ser(inst, cfg);
    const auto complete = run_network_ser(inst, TradeNetwork::complete(n), cfg);
    if (trade_log_csv(plain.log) != trade_log_csv(complete.log)) ++log_mismatch;

    IntMatrix cap(static_cast<std::size_t>(n), static_cast<std::size_t>(m), 0);
    for (std::size_t h = 0; h < cap.rows(); ++h)
      for (std::size_t j = 0; j < cap.cols(); ++j) cap(h, j) = inst.endowments(h, j) + ref::rand_int(rng, 0, 5);
    std::vector<std::pair<int, int>> ring_edges;
    for (int h = 0; h < n; ++h) ring_edges.emplace_back(h, (h + 1) % n);
    const std::vector<std::pair<TradeNetwork, bool>> nets{{TradeNetwork::complete(n), false},
                                                          {TradeNetwork::star(n), false},
                                                          {TradeNetwork::ring(n), false},
                                                          {TradeNetwork::path(n), false},
                                                          {TradeNetwork(n, ring_edges, cap), true}};
    for (const auto& [net, capped] : nets) {
      const auto res = run_network_ser(inst, net, cfg);
      ++runs;
      if (!check_flow_balance(inst, net, res.final_allocation, res.flows)) ++unbalanced;
      if (capped) {
        Allocation x = inst.endowments;
        for (const auto& ev : res.log.events) {
          direction(inst, ev.h, ev.k, ev.i, ev.j).apply(x, ev.alpha);
          for (std::size_t h = 0; h < cap.rows(); ++h)
            for (std::size_t j = 0; j < cap.cols(); ++j)
              if (x(h, j) > cap(h, j)) ++over_capacity;
        }
      }
    }
  }
  o.check(log_mismatch == 0, std::to_string(kInstances) + " complete-graph logs identical to the plain run (" +
                                 std::to_string(log_mismatch) + " differ)");
  o.check(unbalanced == 0, std::to_string(runs) + " runs with exact flow balance (" + std::to_string(unbalanced) +
                               " unbalanced)");
  o.check(over_capacity == 0, "capacities respected at every step (" + std::to_string(over_capacity) + " breaches)");
  return o;
}

// ---------------------------------------------------------------------------------------
// 12. Null-model samplers.
Outcome null_models() {
  constexpr std::size_t kDraws = 10000;
  constexpr double kMinP = 0.01;
  Outcome o;
  RealMatrix base(3, 3, 0.0);
  base(0, 1) = base(1, 0) = 2.0;
  const auto sample = sample_null(ValuedNetwork(base), NullModel::kFixedTotal, kDraws, 12001);
  std::map<std::tuple<int, int, int>, int> counts;
  int off_total = 0;
  for (const auto& g : sample.networks) {
    if (g.total() != 2.0) ++off_total;
    counts[{static_cast<int>(g.weight(0, 1)), static_cast<int>(g.weight(0, 2)), static_cast<int>(g.weight(1, 2))}]++;
  }
  const double expected = static_cast<double>(kDraws) / 6.0;
  double chi2 = 0.0;
  for (const auto& [cell, c] : counts) chi2 += (c - expected) * (c - expected) / expected;
  chi2 += static_cast<double>(6 - std::min<std::size_t>(6, counts.size())) * expected;
  const double p = boost::math::cdf(boost::math::complement(boost::math::chi_squared(5.0), chi2));
  o.check(counts.size() == 6 && p > kMinP, "chi-square uniformity over the 6 cells, p = " + num(p, 4));

  // Conditioning on a network produced by the local search.
  auto inst = generate_instance(10, 5, 12002, {0.4, 0.4, 0.4});
  const auto res = run_ser(inst, make_config(SearchMode::kFirstImprove, Objective::kBilateralPareto));
  const auto observed = ValuedNetwork::from_counts(res.log.interaction);
  const auto fixed_total = sample_null(observed, NullModel::kFixedTotal, 1000, 12003);
  const auto fixed_rows = sample_null(observed, NullModel::kFixedRows, 1000, 12004);
  for (const auto& g : fixed_total.networks)
    if (g.total() != observed.total()) ++off_total;
  int off_rows = 0;
  for (const auto& g : fixed_rows.networks)
    if (g.strengths() != observed.strengths()) ++off_rows;
  o.check(off_total == 0 && off_rows == 0, "every sample keeps its conditioning (" + std::to_string(off_total) +
                                               " total, " + std::to_string(off_rows) + " row-sum breaks)");
  if (auto ac = strength_assortativity(observed)) {
    double mean = 0.0;
    int defined = 0;
    for (const auto& g : fixed_total.networks) {
      if (auto v = strength_assortativity(g)) {
        mean += *v;
        ++defined;
      }
    }
    if (defined > 0) mean /= defined;
    o.note("observed AC " + num(*ac, 4) + " vs fixed-total null mean " + num(mean, 4) + ": observed is " +
           (*ac < mean ? "below" : "above") + " the null");
  } else {
    o.note("AC undefined on the observed network");
  }
  return o;
}

// ---------------------------------------------------------------------------------------
// 13. Assortativity coefficients.
Outcome assortativity_checks() {
  constexpr double kHandTol = 1e-12;
  constexpr int kNetworks = 100;
  Outcome o;
  RealMatrix hand(3, 3, 0.0);
  hand(0, 1) = hand(1, 0) = 5.0;
  hand(0, 2) = hand(2, 0) = 1.0;
  hand(1, 2) = hand(2, 1) = 1.0;
  const std::vector<std::vector<double>> c{{1, 0}, {0, 1}, {1, 1}};
  const auto v = assortativity(ValuedNetwork(hand), c, AssortativityType::kType1);
  o.check(v && std::abs(*v - 1.0) <= kHandTol, "3-node Type1 example = " + (v ? num(*v, 15) : std::string("n/a")));

  std::mt19937_64 rng(13001);
  int out_of_range = 0;
  int defined = 0;
  for (int t = 0; t < kNetworks; ++t) {
    const auto n = static_cast<std::size_t>(ref::rand_int(rng, 3, 9));
    RealMatrix w(n, n, 0.0);
    for (std::size_t a = 0; a < n; ++a)
      for (std::size_t b = a + 1; b < n; ++b) w(a, b) = w(b, a) = static_cast<double>(ref::rand_int(rng, 0, 6));
    std::vector<std::vector<double>> rows(n, std::vector<double>(3));
    for (auto& r : rows)
      for (auto& e : r) e = ref::rand_real(rng, 0.0, 10.0);
    const ValuedNetwork net(w);
    std::vector<std::optional<double>> vals{assortativity(net, rows, AssortativityType::kType1),
                                            assortativity(net, rows, AssortativityType::kType2),
                                            assortativity(net, rows, AssortativityType::kType3),
                                            strength_assortativity(net)};
    for (const auto& x : vals) {
      if (!x) continue;
      ++defined;
      if (*x < -1.0 - kHandTol || *x > 1.0 + kHandTol) ++out_of_range;
    }
  }
  o.check(out_of_range == 0, std::to_string(defined) + " defined values over " + std::to_string(kNetworks) +
                                 " networks, " + std::to_string(out_of_range) + " outside [-1, 1]");
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"two-agent CARA pair", cara_pair},
      {"three-agent worked example", worked_example},
      {"frontier vs brute force", frontier_oracle},
      {"Pareto filter vs all-pairs filter", pareto_filter_oracle},
      {"local-search fixed points", ser_fixed_points},
      {"allocation count bound", allocation_count},
      {"CARA unimodality", unimodality},
      {"welfare step bound", lyapunov},
      {"interior-point method", interior_point},
      {"ERP count scaling", scaling},
      {"network-restricted search", network_variant},
      {"null models", null_models},
      {"assortativity", assortativity_checks},
  };
  int failed = 0;
  for (std::size_t c = 0; c < criteria.size(); ++c) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = criteria[c].second();
    } catch (const std::exception& e) {
      out.check(false, std::string("exception: ") + e.what());
    }
    if (!out.pass) ++failed;
    std::printf("[%s] criterion %zu: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", c + 1, criteria[c].first.c_str(),
                seconds_since(t0));
    for (const auto& d : out.details) std::printf("         %s\n", d.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
