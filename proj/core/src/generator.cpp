#include "barter/generator.hpp"

#include <algorithm>
#include <functional>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "barter/netstats.hpp"
#include "barter/random.hpp"

namespace barter {
namespace {

std::vector<double> average_ranks(std::span<const double> v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> r(v.size());
  for (std::size_t s = 0; s < idx.size();) {
    std::size_t e = s;
    while (e + 1 < idx.size() && v[idx[e + 1]] == v[idx[s]]) ++e;
    const double avg = 0.5 * static_cast<double>(s + e) + 1.0;
    for (std::size_t t = s; t <= e; ++t) r[idx[t]] = avg;
    s = e + 1;
  }
  return r;
}

// Reorders `values` so its rank order follows `anchor`, then applies random transpositions that
// keep the rank correlation at or above `level`.
// Ties on both sides can cap the sorted arrangement below `level`; `redraw` then resamples the
// values (a bounded number of times) before sorting again.
template <class T>
void impose_association(std::vector<T>& values, std::span<const double> anchor, double level, int attempts,
                        std::mt19937_64& rng, const std::function<void(std::vector<T>&)>& redraw = {}) {
  if (level <= 0.0 || values.size() < 2) return;
  auto as_double = [&]() {
    std::vector<double> d(values.size());
    for (std::size_t a = 0; a < values.size(); ++a) d[a] = static_cast<double>(values[a]);
    return d;
  };
  for (int round = 0; round < 100; ++round) {
    if (round > 0) redraw(values);
    std::vector<T> sorted = values;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> order(anchor.size());
    std::iota(order.begin(), order.end(), 0);
    // Random tie-breaking among equal anchor values.
    for (std::size_t a = order.size(); a > 1; --a) std::swap(order[a - 1], order[uniform_below(rng, a)]);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return anchor[a] < anchor[b]; });
    for (std::size_t r = 0; r < order.size(); ++r) values[order[r]] = sorted[r];
    if (!redraw || spearman(as_double(), anchor) >= level) break;
  }
  const int tries = attempts > 0 ? attempts : static_cast<int>(4 * values.size());
  for (int t = 0; t < tries; ++t) {
    const std::size_t a = uniform_below(rng, values.size());
    const std::size_t b = uniform_below(rng, values.size());
    if (a == b) continue;
    std::swap(values[a], values[b]);
    if (spearman(as_double(), anchor) < level) std::swap(values[a], values[b]);
  }
}

std::vector<double> to_double(std::span<const std::int64_t> v) { return {v.begin(), v.end()}; }

}  // namespace

double spearman(std::span<const double> a, std::span<const double> b) {
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  return pearson(ra, rb).value_or(0.0);
}

EconomyInstance generate_instance(int n, int m, std::uint64_t seed, const FactorLevels& factors,
                                  const GeneratorOptions& options) {
  if (n <= 0 || m <= 0) throw std::invalid_argument("generate_instance needs positive sizes");
  EconomyInstance inst;
  inst.n_agents = n;
  inst.n_commodities = m;
  const auto nn = static_cast<std::size_t>(n);
  const auto mm = static_cast<std::size_t>(m);

  auto price_rng = make_stream(seed, "generator.prices");
  for (std::size_t j = 0; j < mm; ++j) {
    const double z = standard_normal(price_rng);
    const auto p = std::max<std::int64_t>(
        1, std::llround(static_cast<double>(options.base_price) * std::exp(factors.price_sigma * z)));
    inst.prices.emplace_back(p);
  }
  inst.weights.assign(nn, Rational(1));

  auto endow_rng = make_stream(seed, "generator.endowments");
  inst.endowments = IntMatrix(nn, mm, 0);
  for (auto& v : inst.endowments.data()) {
    v = static_cast<std::int64_t>(uniform_below(endow_rng, static_cast<std::uint64_t>(options.max_endowment) + 1));
  }

  auto util_rng = make_stream(seed, "generator.utilities");
  std::vector<std::vector<std::int64_t>> coef(nn, std::vector<std::int64_t>(mm));
  std::vector<std::vector<double>> cara(nn, std::vector<double>(mm));
  for (std::size_t h = 0; h < nn; ++h) {
    for (std::size_t j = 0; j < mm; ++j) {
      coef[h][j] = 1 + static_cast<std::int64_t>(uniform_below(util_rng, static_cast<std::uint64_t>(options.max_coefficient)));
      cara[h][j] = 0.005 + 0.095 * uniform_unit(util_rng);
    }
  }

  auto assoc_rng = make_stream(seed, "generator.association");
  const auto cmax = static_cast<std::uint64_t>(options.max_coefficient);
  const auto emax = static_cast<std::uint64_t>(options.max_endowment) + 1;
  for (std::size_t h = 0; h < nn; ++h) {
    const auto q = to_double(inst.endowments.row(h));
    impose_association<std::int64_t>(coef[h], q, factors.same_assoc, options.swap_attempts, assoc_rng,
                                     [&](std::vector<std::int64_t>& v) {
                                       for (auto& e : v) e = 1 + static_cast<std::int64_t>(uniform_below(assoc_rng, cmax));
                                     });
    impose_association<double>(cara[h], q, factors.same_assoc, options.swap_attempts, assoc_rng);
  }
  if (factors.cross_assoc > 0.0 && nn > 1) {
    for (std::size_t h = 0; h < nn; ++h) {
      const std::size_t partner = (h + 1) % nn;
      std::vector<double> anchor;
      if (options.cara) {
        anchor = cara[partner];
      } else {
        anchor.assign(coef[partner].begin(), coef[partner].end());
      }
      auto row = inst.endowments.row(h);
      std::vector<std::int64_t> vals(row.begin(), row.end());
      impose_association<std::int64_t>(vals, anchor, factors.cross_assoc, options.swap_attempts, assoc_rng,
                                       [&](std::vector<std::int64_t>& v) {
                                         for (auto& e : v) e = static_cast<std::int64_t>(uniform_below(assoc_rng, emax));
                                       });
      std::copy(vals.begin(), vals.end(), row.begin());
    }
  }

  for (std::size_t h = 0; h < nn; ++h) {
    if (options.cara) {
      inst.utilities.push_back(UtilitySpec::Cara(cara[h], static_cast<double>(m)));
    } else {
      std::vector<Rational> c;
      for (auto v : coef[h]) c.emplace_back(v);
      inst.utilities.push_back(UtilitySpec::Linear(std::move(c)));
    }
  }
  return inst;
}

}  // namespace barter
