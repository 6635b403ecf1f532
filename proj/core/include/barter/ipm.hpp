#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "barter/economy.hpp"

namespace barter {

struct IpmState;
struct NewtonDirection;
class IpmProblem;

struct IpmOptions {
  // Welfare weights alpha_h; empty means all ones.
  std::vector<double> welfare_weights;
  double tolerance = 1e-6;
  int max_iterations = 200;
  double sigma = 0.2;
  double step_fraction = 0.995;
  // Include the rows u^h(x^h) - s_h = u^h(q^h), s >= 0.
  bool disagreement_rows = true;
  // Upper bounds for (x, x0) and s; defaults are derived from the supply and utility scale.
  std::optional<std::vector<double>> upper_v;
  std::optional<double> upper_s;
  // Called with every Newton direction before the step is taken.
  std::function<void(const IpmProblem&, const IpmState&, const NewtonDirection&)> on_direction;
};

// Continuous relaxation: maximize sum_h alpha_h u^h(x^h) subject to budget rows,
// linking rows sum_h d^h x^h + x0 = sum_h d^h q^h, and optional disagreement rows.
// Variable layout: v = (x^1, ..., x^n, x0), agent blocks of length m.
class IpmProblem {
 public:
  static IpmProblem build(const EconomyInstance& inst, const IpmOptions& options);

  int n = 0;
  int m = 0;
  bool disagreement = true;
  std::vector<double> prices;
  std::vector<double> weights;
  std::vector<double> alpha;
  std::vector<double> b;       // n budget values then m weighted supplies
  std::vector<double> u_ref;   // u^h(q^h)
  std::vector<UtilitySpec> utilities;
  std::vector<double> upper_v;
  std::vector<double> upper_s;

  std::size_t nv() const { return static_cast<std::size_t>(n * m + m); }
  std::size_t ns() const { return disagreement ? static_cast<std::size_t>(n) : 0; }
  std::size_t ny() const { return static_cast<std::size_t>(n + m); }

  double agent_utility(int h, const std::vector<double>& v) const;
  std::vector<double> agent_gradient(int h, const std::vector<double>& v) const;
  std::vector<double> agent_hessian(int h, const std::vector<double>& v) const;
  double welfare(const std::vector<double>& v) const;
};

struct IpmState {
  std::vector<double> x;  // nm + m
  std::vector<double> s;
  std::vector<double> y;  // n budget duals then m linking duals
  std::vector<double> t;
  std::vector<double> z_v;
  std::vector<double> w_v;
  std::vector<double> z_s;
  std::vector<double> w_s;
  double mu = 1.0;
};

struct NewtonDirection {
  std::vector<double> dx;
  std::vector<double> ds;
  std::vector<double> dy;
  std::vector<double> dt;
  std::vector<double> dz_v;
  std::vector<double> dw_v;
  std::vector<double> dz_s;
  std::vector<double> dw_s;
};

struct KktResiduals {
  std::vector<double> r1;  // A v - b
  std::vector<double> r2;  // u(x) - u(q) - s
  std::vector<double> r3;  // A'y + sum (t - alpha) grad u - z_v + w_v
  std::vector<double> r4;  // -t - z_s + w_s
  std::vector<double> r5;  // V Z_v e - mu
  std::vector<double> r6;  // S Z_s e - mu
  std::vector<double> r7;  // (U_v - V) W_v e - mu
  std::vector<double> r8;  // (U_s - S) W_s e - mu
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
};

struct StructuredStats {
  std::int64_t core_factorizations = 0;
  int core_dimension = 0;
  std::int64_t regularizations = 0;
};

// Residual blocks at the state's barrier parameter; throws on a non-interior iterate.
KktResiduals kkt_residuals(const IpmProblem& problem, const IpmState& state);
NewtonDirection newton_direction_structured(const IpmProblem& problem, const IpmState& state,
                                            StructuredStats* stats = nullptr);

struct IpmTraceRow {
  int iteration = 0;
  double mu = 0.0;
  double primal = 0.0;
  double dual = 0.0;
  double complementarity = 0.0;
  double welfare = 0.0;
  double step = 0.0;
};

struct IpmResult {
  IpmState state;
  RealMatrix allocation;
  std::vector<double> linking_slack;
  double welfare = 0.0;
  bool converged = false;
  int iterations = 0;
  KktResiduals residuals;
  std::vector<IpmTraceRow> trace;
  StructuredStats stats;
  std::vector<std::string> notes;
};

IpmResult run_ipm(const EconomyInstance& inst, const IpmOptions& options = {});
IpmState initial_state(const IpmProblem& problem);
std::string ipm_trace_csv(const IpmResult& result);

}  // namespace barter
