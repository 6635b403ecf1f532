#include <gtest/gtest.h>

#include <random>

#include "barter/experiment.hpp"
#include "barter/oracle.hpp"
#include "barter/ser.hpp"
#include "oracles.hpp"

using namespace barter;

namespace {

SearchConfig cfg(SearchMode mode, Objective obj, std::uint64_t seed = 0) {
  SearchConfig c;
  c.mode = mode;
  c.objective = obj;
  c.order_seed = seed;
  return c;
}

}  // namespace

TEST(Candidates, CountAndOrder) {
  std::mt19937_64 rng(1);
  auto inst = ref::random_instance(rng, {.n = 4, .m = 5});
  auto c = candidate_directions(inst);
  EXPECT_EQ(c.size(), 4u * 3u * 5u * 4u / 4u);
  EXPECT_EQ(std::tie(c[0].h, c[0].k, c[0].i, c[0].j), std::make_tuple(0, 1, 0, 1));
  EXPECT_EQ(std::tie(c.back().h, c.back().k, c.back().i, c.back().j), std::make_tuple(2, 3, 3, 4));
  auto shuffled = order_candidates(c, 99);
  EXPECT_EQ(shuffled.size(), c.size());
  auto again = order_candidates(c, 99);
  for (std::size_t e = 0; e < c.size(); ++e) EXPECT_EQ(shuffled[e].step, again[e].step);
}

TEST(RunSer, WorkedExampleFirstMove) {
  auto inst = worked_example_instance();
  auto res = run_ser(inst, cfg(SearchMode::kFirstImprove, Objective::kBilateralPareto));
  ASSERT_FALSE(res.log.events.empty());
  const auto& ev = res.log.events.front();
  Allocation x = direction(inst, ev.h, ev.k, ev.i, ev.j).applied(inst.endowments, ev.alpha);
  EXPECT_EQ(x, IntMatrix::from_rows({{21, 3, 0}, {10, 4, 58}, {22, 2, 2}}));
  EXPECT_EQ(ev.utilities, (std::vector<double>{1608, 574, 1220}));
  EXPECT_TRUE(res.converged);
}

TEST(RunSer, AlreadyStable) {
  EconomyInstance inst;
  inst.n_agents = 2;
  inst.n_commodities = 2;
  inst.prices = {1, 1};
  inst.weights = {1, 1};
  inst.endowments = IntMatrix::from_rows({{3, 4}, {5, 1}});
  inst.utilities = {UtilitySpec::Linear({2, 3}), UtilitySpec::Linear({2, 3})};
  auto res = run_ser(inst, cfg(SearchMode::kFirstImprove, Objective::kBilateralPareto));
  EXPECT_TRUE(res.log.events.empty());
  EXPECT_EQ(res.final_allocation, inst.endowments);
  EXPECT_TRUE(res.converged);
}

TEST(RunSer, FixedPointCertificate) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 40; ++trial) {
    ref::RandomInstanceOptions o{.n = 2 + trial % 3, .m = 2 + trial % 4, .cara = trial % 2 == 1, .mixed = trial % 4 == 1};
    auto inst = ref::random_instance(rng, o);
    for (auto mode : {SearchMode::kFirstImprove, SearchMode::kBestImprove}) {
      for (auto obj : {Objective::kBilateralPareto, Objective::kWelfare}) {
        auto res = run_ser(inst, cfg(mode, obj, trial % 3 == 0 ? 0 : 1234 + trial));
        ASSERT_TRUE(res.converged);
        EXPECT_FALSE(ref::has_improving_move(inst, res.final_allocation, obj)) << "trial " << trial;
        EXPECT_TRUE(is_feasible(inst, res.final_allocation).feasible);
        EXPECT_EQ(replay(inst, res.log), res.final_allocation);
      }
    }
  }
}

TEST(RunSer, ParetoModeNeverHurtsAnyone) {
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 30; ++trial) {
    auto inst = ref::random_instance(rng, {.n = 4, .m = 4, .cara = true, .mixed = true});
    auto res = run_ser(inst, cfg(SearchMode::kFirstImprove, Objective::kBilateralPareto));
    auto prev = utilities(inst, inst.endowments);
    for (const auto& ev : res.log.events) {
      for (std::size_t h = 0; h < prev.size(); ++h) EXPECT_GE(ev.utilities[h], prev[h]);
      prev = ev.utilities;
    }
  }
}

TEST(RunSer, DeterministicLogs) {
  std::mt19937_64 rng(9);
  auto inst = ref::random_instance(rng, {.n = 5, .m = 5, .cara = true, .mixed = true});
  for (std::uint64_t seed : {0ull, 77ull}) {
    auto a = run_ser(inst, cfg(SearchMode::kBestImprove, Objective::kWelfare, seed));
    auto b = run_ser(inst, cfg(SearchMode::kBestImprove, Objective::kWelfare, seed));
    EXPECT_EQ(trade_log_csv(a.log), trade_log_csv(b.log));
    EXPECT_EQ(trade_log_json(a.log), trade_log_json(b.log));
  }
}

TEST(RunSer, NetworksAreSymmetricAndConserveValue) {
  std::mt19937_64 rng(10);
  for (int trial = 0; trial < 20; ++trial) {
    auto inst = ref::random_instance(rng, {.n = 5, .m = 3});
    auto res = run_ser(inst, cfg(SearchMode::kFirstImprove, Objective::kBilateralPareto));
    double traded = 0.0;
    for (const auto& ev : res.log.events) traded += ev.traded_value;
    double upper = 0.0;
    std::int64_t pairs = 0;
    for (std::size_t h = 0; h < 5; ++h) {
      for (std::size_t k = 0; k < 5; ++k) {
        EXPECT_EQ(res.log.interaction(h, k), res.log.interaction(k, h));
        EXPECT_DOUBLE_EQ(res.log.flow(h, k), res.log.flow(k, h));
        if (h < k) {
          upper += res.log.flow(h, k);
          pairs += res.log.interaction(h, k);
        }
      }
    }
    EXPECT_NEAR(upper, traded, 1e-9 * (1.0 + traded));
    EXPECT_EQ(pairs, static_cast<std::int64_t>(res.log.events.size()));
  }
}

TEST(RunSer, WelfareBelowIntegerOptimum) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    auto inst = ref::random_instance(rng, {.n = 3, .m = 3, .max_endowment = 6});
    auto opt = branch_and_bound_linear(inst).welfare.to_double();
    for (auto mode : {SearchMode::kFirstImprove, SearchMode::kBestImprove}) {
      auto res = run_ser(inst, cfg(mode, Objective::kWelfare));
      double w = 0.0;
      for (double v : utilities(inst, res.final_allocation)) w += v;
      EXPECT_LE(w, opt + 1e-9);
    }
  }
}

TEST(SelectionScore, FrontierCountOnCaraPair) {
  auto inst = cara_pair_instance();
  EXPECT_EQ(selection_score(inst, inst.endowments, direction(inst, 0, 1, 0, 1), Criterion::kFrontierCount), 5.0);
}

TEST(SelectionScore, ZeroWhenNothingImproves) {
  EconomyInstance inst;
  inst.n_agents = 2;
  inst.n_commodities = 2;
  inst.prices = {1, 1};
  inst.weights = {1, 1};
  inst.endowments = IntMatrix::from_rows({{3, 4}, {5, 1}});
  inst.utilities = {UtilitySpec::Linear({1, 1}), UtilitySpec::Linear({1, 1})};
  EXPECT_EQ(selection_score(inst, inst.endowments, direction(inst, 0, 1, 0, 1), Criterion::kSum), 0.0);
}

TEST(SelectionScore, LinearWelfareGainIsSlopeTimesStep) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 50; ++trial) {
    auto inst = ref::random_instance(rng, {.n = 2, .m = 2, .max_endowment = 20});
    auto d = direction(inst, 0, 1, 0, 1);
    auto r = step_interval(inst, inst.endowments, d);
    Rational slope = inst.utilities[0].linear[0] * Rational(d.step[0]) + inst.utilities[0].linear[1] * Rational(d.step[1]) +
                     inst.utilities[1].linear[0] * Rational(d.step[2]) + inst.utilities[1].linear[1] * Rational(d.step[3]);
    std::int64_t best = slope.sign() > 0 ? r.hi_int : (slope.sign() < 0 ? r.lo_int : 0);
    const double expect = (slope * Rational(best)).to_double();
    EXPECT_NEAR(selection_score(inst, inst.endowments, d, Criterion::kSum), std::max(0.0, expect), 1e-9);
    auto moved = d.applied(inst.endowments, best);
    double du = 0.0;
    for (int h : {0, 1}) du += utility(inst, h, moved) - utility(inst, h, inst.endowments);
    EXPECT_NEAR(du, expect, 1e-9);
  }
}

TEST(SelectionScore, MarginalRateIsNonnegative) {
  auto inst = cara_pair_instance();
  EXPECT_GE(selection_score(inst, inst.endowments, direction(inst, 0, 1, 0, 1), Criterion::kMarginalRate), 0.0);
}

TEST(Lyapunov, EmptyAndSingleStep) {
  EconomyInstance inst;
  inst.n_agents = 2;
  inst.n_commodities = 2;
  inst.prices = {1, 1};
  inst.weights = {1, 1};
  inst.endowments = IntMatrix::from_rows({{4, 0}, {0, 4}});
  inst.utilities = {UtilitySpec::Linear({0, 1}), UtilitySpec::Linear({1, 0})};
  LyapunovSeries empty;
  EXPECT_TRUE(check_delta_bound(inst, empty));
  EXPECT_DOUBLE_EQ(lyapunov_bound(inst), 4.0);
  auto bad = inst;
  bad.prices[0] = Rational(2);
  EXPECT_THROW(check_delta_bound(bad, empty), std::invalid_argument);
  auto cara = cara_pair_instance();
  EXPECT_THROW(check_delta_bound(cara, empty), std::invalid_argument);
}

TEST(TradeLogIo, CsvHeader) {
  auto res = run_ser(worked_example_instance(), cfg(SearchMode::kFirstImprove, Objective::kBilateralPareto));
  auto csv = trade_log_csv(res.log);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "t,h,k,i,j,alpha,u1,u2,u3");
  EXPECT_NE(lyapunov_csv(res.lyapunov).find("t,U,delta,bound"), std::string::npos);
}
