#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "barter/economy.hpp"
#include "barter/rational.hpp"

namespace barter {

// Elementary reallocation direction for agents (h,k) and commodities (i,j).
// Entry order everywhere: (h,i), (h,j), (k,i), (k,j).
struct ERDirection {
  int h = 0;
  int k = 1;
  int i = 0;
  int j = 1;
  std::array<Rational, 4> raw;
  Rational factor;
  std::array<std::int64_t, 4> step{};

  // Step entries of one participating agent on commodities (i, j).
  std::array<std::int64_t, 2> agent_step(int agent) const;
  void apply(Allocation& x, std::int64_t alpha) const;
  Allocation applied(const Allocation& x, std::int64_t alpha) const;
};

struct StepInterval {
  Rational lo;
  Rational hi;
  std::int64_t lo_int = 0;
  std::int64_t hi_int = 0;

  bool contains(std::int64_t a) const { return a >= lo_int && a <= hi_int; }
  std::int64_t width() const { return hi_int - lo_int; }
};

Rational g_factor(std::span<const Rational> v);
ERDirection direction(const EconomyInstance& inst, int h, int k, int i, int j);
// Capacities and rationing bounds are taken from the instance.
StepInterval step_interval(const EconomyInstance& inst, const Allocation& x, const ERDirection& dir);

// Utility of one participating agent at x + alpha*S.
double line_utility(const EconomyInstance& inst, int agent, const Allocation& x, const ERDirection& dir,
                    double alpha);
double line_utility(const EconomyInstance& inst, int agent, const Allocation& x, const ERDirection& dir,
                    std::int64_t alpha);

enum class ArgmaxMethod { kClosedForm, kTernary };

double ternary_search_max(const std::function<double(double)>& f, double lo, double hi, double tol = 1e-9);
// Same search driven by a comparison: less(a, b) is true when the objective at a is below b.
double ternary_search_max(const std::function<bool(double, double)>& less, double lo, double hi,
                          double tol = 1e-9);

// Real maximizer of the agent's utility over [lo, hi]. Linear agents get the improving
// endpoint, or 0 when the direction leaves their utility unchanged.
double continuous_argmax(const EconomyInstance& inst, int agent, const Allocation& x, const ERDirection& dir,
                         ArgmaxMethod method = ArgmaxMethod::kClosedForm);
double continuous_argmax(const EconomyInstance& inst, int agent, const Allocation& x, const ERDirection& dir,
                         const StepInterval& range, ArgmaxMethod method = ArgmaxMethod::kClosedForm);

struct FrontierPoint {
  std::int64_t alpha = 0;
  double u_h = 0.0;
  double u_k = 0.0;
};

// kExact: every integer alpha whose utility pair is nondominated among feasible alphas and
// weakly improves on alpha = 0 (equal pairs keep the smallest |alpha|).
// kArgmaxSegment: the integers between the two real argmaxes (falling back to the nearest
// integers when none lies between); linear pairs use the sign test.
enum class FrontierRule { kExact, kArgmaxSegment };

std::vector<FrontierPoint> pareto_frontier(const EconomyInstance& inst, const Allocation& x, const ERDirection& dir,
                                           FrontierRule rule = FrontierRule::kExact);
std::vector<FrontierPoint> pareto_frontier(const EconomyInstance& inst, const Allocation& x, const ERDirection& dir,
                                           const StepInterval& range, FrontierRule rule = FrontierRule::kExact);

}  // namespace barter
