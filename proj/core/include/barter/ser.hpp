#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "barter/economy.hpp"
#include "barter/erp.hpp"

namespace barter {

enum class SearchMode { kFirstImprove, kBestImprove };
enum class Objective { kBilateralPareto, kWelfare };
enum class Criterion { kSum, kL1Norm, kL2Norm, kLinfNorm, kFrontierCount, kMarginalRate };

struct SearchConfig {
  SearchMode mode = SearchMode::kFirstImprove;
  Objective objective = Objective::kBilateralPareto;
  Criterion welfare_kind = Criterion::kSum;
  // 0 keeps the lexicographic candidate order; any other value shuffles it deterministically.
  std::uint64_t order_seed = 0;
  std::int64_t max_iterations = 1'000'000;
};

struct TradeEvent {
  std::int64_t t = 0;
  int h = 0;
  int k = 0;
  int i = 0;
  int j = 0;
  std::int64_t alpha = 0;
  std::vector<double> utilities;
  double traded_value = 0.0;
};

struct TradeLog {
  std::vector<TradeEvent> events;
  std::int64_t erps_solved = 0;
  std::int64_t candidates_examined = 0;
  std::int64_t neighborhood_size = 0;
  double neighborhood_explored = 0.0;
  IntMatrix interaction;
  RealMatrix flow;
};

struct LyapunovSeries {
  std::vector<double> values;
  std::vector<double> deltas;
  double bound = 0.0;
};

struct SerResult {
  Allocation final_allocation;
  TradeLog log;
  LyapunovSeries lyapunov;
  bool converged = false;
};

// A candidate move along one direction, as judged by the configured objective.
struct Proposal {
  bool accept = false;
  std::int64_t alpha = 0;
  double score = 0.0;
};

// Unordered candidates {h<k} x {i<j}, agent pairs outermost.
std::vector<ERDirection> candidate_directions(const EconomyInstance& inst);
std::vector<ERDirection> order_candidates(std::vector<ERDirection> candidates, std::uint64_t seed);

double welfare(std::span<const double> u, Criterion kind);

Proposal propose(const EconomyInstance& inst, const Allocation& x, std::span<const double> u,
                 const ERDirection& dir, const SearchConfig& config);

double selection_score(const EconomyInstance& inst, const Allocation& x, const ERDirection& dir,
                       Criterion criterion);

// Value handed over by both participants, in price terms.
double traded_value(const EconomyInstance& inst, const ERDirection& dir, std::int64_t alpha);

SerResult run_ser(const EconomyInstance& inst, const SearchConfig& config);
SerResult run_ser(const EconomyInstance& inst, const SearchConfig& config, std::span<const ERDirection> candidates);

double lyapunov_bound(const EconomyInstance& inst);
// Requires linear utilities with every c <= 1 and every price <= 1.
bool check_delta_bound(const EconomyInstance& inst, const LyapunovSeries& series);

Allocation replay(const EconomyInstance& inst, const TradeLog& log);

std::string trade_log_csv(const TradeLog& log);
std::string trade_log_json(const TradeLog& log);
std::string lyapunov_csv(const LyapunovSeries& series);

}  // namespace barter
