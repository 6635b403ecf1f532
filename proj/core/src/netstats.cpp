#include "barter/netstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

#include "barter/random.hpp"

namespace barter {

namespace {

bool is_integral(double v) { return std::abs(v - std::round(v)) < 1e-9; }

// Uniform composition of total into cells parts (stars and bars via a uniform subset of bar positions).
std::vector<std::int64_t> random_composition(std::mt19937_64& rng, std::int64_t total, std::size_t cells) {
  std::vector<std::int64_t> out(cells, 0);
  if (cells == 0) return out;
  if (cells == 1) {
    out[0] = total;
    return out;
  }
  const std::uint64_t slots = static_cast<std::uint64_t>(total) + cells - 1;
  const std::size_t bars = cells - 1;
  // Floyd's algorithm for a uniform bars-subset of [0, slots).
  std::set<std::uint64_t> chosen;
  for (std::uint64_t j = slots - bars; j < slots; ++j) {
    std::uint64_t t = uniform_below(rng, j + 1);
    if (!chosen.insert(t).second) chosen.insert(j);
  }
  std::int64_t prev = -1;
  std::size_t c = 0;
  for (auto b : chosen) {
    out[c++] = static_cast<std::int64_t>(b) - prev - 1;
    prev = static_cast<std::int64_t>(b);
  }
  out[c] = static_cast<std::int64_t>(slots) - prev - 1;
  return out;
}

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

}  // namespace

ValuedNetwork::ValuedNetwork(RealMatrix matrix) : w_(std::move(matrix)) {
  if (w_.rows() != w_.cols()) throw std::invalid_argument("valued network must be square");
  for (std::size_t h = 0; h < n(); ++h) {
    if (w_(h, h) != 0.0) throw std::invalid_argument("valued network must have a zero diagonal");
    for (std::size_t k = 0; k < n(); ++k) {
      if (w_(h, k) < 0.0) throw std::invalid_argument("valued network must be nonnegative");
      if (w_(h, k) != w_(k, h)) throw std::invalid_argument("valued network must be symmetric");
    }
  }
}

ValuedNetwork ValuedNetwork::from_counts(const IntMatrix& counts) {
  RealMatrix m(counts.rows(), counts.cols());
  for (std::size_t a = 0; a < counts.data().size(); ++a) m.data()[a] = static_cast<double>(counts.data()[a]);
  return ValuedNetwork(m);
}

std::vector<double> ValuedNetwork::strengths() const {
  std::vector<double> s(n(), 0.0);
  for (std::size_t h = 0; h < n(); ++h) {
    for (std::size_t k = 0; k < n(); ++k) s[h] += w_(h, k);
  }
  return s;
}

std::size_t ValuedNetwork::degree(std::size_t h) const {
  std::size_t d = 0;
  for (std::size_t k = 0; k < n(); ++k) d += w_(h, k) > 0.0 ? 1 : 0;
  return d;
}

double ValuedNetwork::total() const {
  double t = 0.0;
  for (std::size_t h = 0; h < n(); ++h) {
    for (std::size_t k = h + 1; k < n(); ++k) t += w_(h, k);
  }
  return t;
}

std::optional<double> pearson(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("pearson: length mismatch");
  if (x.size() < 2) return std::nullopt;
  const double mx = mean_of(x);
  const double my = mean_of(y);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t a = 0; a < x.size(); ++a) {
    sxy += (x[a] - mx) * (y[a] - my);
    sxx += (x[a] - mx) * (x[a] - mx);
    syy += (y[a] - my) * (y[a] - my);
  }
  const double scale = std::max(1.0, std::max(std::abs(mx), std::abs(my)));
  const double tiny = 1e-24 * scale * scale * static_cast<double>(x.size());
  if (sxx <= tiny || syy <= tiny) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

std::optional<double> assortativity(const ValuedNetwork& net, const std::vector<std::vector<double>>& c_rows,
                                    AssortativityType type) {
  const std::size_t n = net.n();
  if (type != AssortativityType::kType2 && c_rows.size() != n) {
    throw std::invalid_argument("assortativity needs one utility row per agent");
  }
  const auto f = net.strengths();
  std::vector<double> dc;
  std::vector<double> df;
  std::vector<double> x;
  for (std::size_t h = 0; h < n; ++h) {
    for (std::size_t k = h + 1; k < n; ++k) {
      if (type != AssortativityType::kType2) {
        double acc = 0.0;
        for (std::size_t j = 0; j < c_rows[h].size(); ++j) {
          const double d = c_rows[h][j] - c_rows[k][j];
          acc += d * d;
        }
        dc.push_back(std::sqrt(acc));
      }
      df.push_back(std::abs(f[h] - f[k]));
      x.push_back(net.weight(h, k));
    }
  }
  switch (type) {
    case AssortativityType::kType1:
      return pearson(dc, x);
    case AssortativityType::kType2:
      return pearson(df, x);
    case AssortativityType::kType3:
      return pearson(dc, df);
  }
  return std::nullopt;
}

std::optional<double> strength_assortativity(const ValuedNetwork& net) {
  const auto s = net.strengths();
  double wsum = 0.0;
  double mx = 0.0;
  for (std::size_t h = 0; h < net.n(); ++h) {
    for (std::size_t k = 0; k < net.n(); ++k) {
      wsum += net.weight(h, k);
      mx += net.weight(h, k) * s[h];
    }
  }
  if (wsum <= 0.0) return std::nullopt;
  mx /= wsum;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t h = 0; h < net.n(); ++h) {
    for (std::size_t k = 0; k < net.n(); ++k) {
      const double w = net.weight(h, k);
      sxy += w * (s[h] - mx) * (s[k] - mx);
      sxx += w * (s[h] - mx) * (s[h] - mx);
    }
  }
  if (sxx <= 1e-24 * std::max(1.0, mx * mx) * wsum) return std::nullopt;
  return std::clamp(sxy / sxx, -1.0, 1.0);
}

double weighted_clustering(const ValuedNetwork& net) {
  const auto s = net.strengths();
  double acc = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < net.n(); ++i) {
    const std::size_t k = net.degree(i);
    if (k == 0) continue;
    ++counted;
    if (k < 2) continue;
    double num = 0.0;
    for (std::size_t j = 0; j < net.n(); ++j) {
      if (j == i || net.weight(i, j) <= 0.0) continue;
      for (std::size_t h = 0; h < net.n(); ++h) {
        if (h == i || h == j || net.weight(i, h) <= 0.0 || net.weight(j, h) <= 0.0) continue;
        num += 0.5 * (net.weight(i, j) + net.weight(i, h));
      }
    }
    acc += num / (s[i] * static_cast<double>(k - 1));
  }
  return counted ? acc / static_cast<double>(counted) : 0.0;
}

double binary_clustering(const ValuedNetwork& net) {
  double acc = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < net.n(); ++i) {
    const std::size_t k = net.degree(i);
    if (k == 0) continue;
    ++counted;
    if (k < 2) continue;
    std::size_t tri = 0;
    for (std::size_t j = 0; j < net.n(); ++j) {
      for (std::size_t h = j + 1; h < net.n(); ++h) {
        if (j == i || h == i) continue;
        if (net.weight(i, j) > 0.0 && net.weight(i, h) > 0.0 && net.weight(j, h) > 0.0) ++tri;
      }
    }
    acc += static_cast<double>(tri) / (0.5 * static_cast<double>(k * (k - 1)));
  }
  return counted ? acc / static_cast<double>(counted) : 0.0;
}

NullSample sample_null(const ValuedNetwork& net, NullModel model, std::size_t samples, std::uint64_t seed,
                       std::size_t rejection_attempts) {
  const std::size_t n = net.n();
  for (double v : net.matrix().data()) {
    if (!is_integral(v)) throw std::invalid_argument("null models require an integer-valued network");
  }
  NullSample out;
  out.networks.reserve(samples);
  if (model == NullModel::kFixedTotal) {
    const auto total = static_cast<std::int64_t>(std::llround(net.total()));
    const std::size_t cells = n * (n - 1) / 2;
    for (std::size_t s = 0; s < samples; ++s) {
      auto rng = make_stream(seed, "null.fixed_total", s);
      auto comp = random_composition(rng, total, cells);
      RealMatrix m(n, n, 0.0);
      std::size_t c = 0;
      for (std::size_t h = 0; h < n; ++h) {
        for (std::size_t k = h + 1; k < n; ++k) {
          m(h, k) = m(k, h) = static_cast<double>(comp[c++]);
        }
      }
      out.networks.emplace_back(std::move(m));
    }
    return out;
  }

  std::vector<std::int64_t> rows(n);
  const auto str = net.strengths();
  std::int64_t sum = 0;
  for (std::size_t h = 0; h < n; ++h) {
    rows[h] = std::llround(str[h]);
    sum += rows[h];
  }
  for (std::size_t h = 0; h < n; ++h) {
    if (2 * rows[h] > sum) throw std::invalid_argument("infeasible row marginals");
  }
  if (sum % 2 != 0) throw std::invalid_argument("infeasible row marginals");

  // Markov chain over alternating 4-cycles, started from the observed matrix; used once rejection fails.
  RealMatrix chain = net.matrix();
  auto chain_rng = make_stream(seed, "null.fixed_rows.chain");
  auto chain_step = [&]() {
    if (n < 4) return;
    std::size_t v[4];
    v[0] = uniform_below(chain_rng, n);
    do v[1] = uniform_below(chain_rng, n); while (v[1] == v[0]);
    do v[2] = uniform_below(chain_rng, n); while (v[2] == v[0] || v[2] == v[1]);
    do v[3] = uniform_below(chain_rng, n); while (v[3] == v[0] || v[3] == v[1] || v[3] == v[2]);
    // +1 on (0,1),(2,3); -1 on (1,2),(3,0).
    if (chain(v[1], v[2]) < 1.0 || chain(v[3], v[0]) < 1.0) return;
    auto bump = [&](std::size_t a, std::size_t b, double d) {
      chain(a, b) += d;
      chain(b, a) += d;
    };
    bump(v[0], v[1], 1.0);
    bump(v[2], v[3], 1.0);
    bump(v[1], v[2], -1.0);
    bump(v[3], v[0], -1.0);
  };
  const std::size_t thin = 10 * n * n;
  for (std::size_t s = 0; s < samples; ++s) {
    auto rng = make_stream(seed, "null.fixed_rows", s);
    bool done = false;
    for (std::size_t attempt = 0; attempt < rejection_attempts && out.exact; ++attempt) {
      IntMatrix m(n, n, 0);
      for (std::size_t h = 0; h < n; ++h) {
        auto comp = random_composition(rng, rows[h], n - 1);
        std::size_t c = 0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k != h) m(h, k) = comp[c++];
        }
      }
      bool sym = true;
      for (std::size_t h = 0; h < n && sym; ++h) {
        for (std::size_t k = h + 1; k < n; ++k) {
          if (m(h, k) != m(k, h)) {
            sym = false;
            break;
          }
        }
      }
      if (sym) {
        out.networks.push_back(ValuedNetwork::from_counts(m));
        done = true;
        break;
      }
    }
    if (done) continue;
    out.exact = false;
    for (std::size_t step = 0; step < thin; ++step) chain_step();
    out.networks.emplace_back(chain);
  }
  return out;
}

double null_pvalue(double observed, std::span<const double> samples, Tail tail) {
  if (samples.size() < 100) throw std::invalid_argument("null_pvalue needs at least 100 samples");
  std::size_t count = 0;
  for (double s : samples) {
    if (tail == Tail::kLeft ? s <= observed : s >= observed) ++count;
  }
  return static_cast<double>(count + 1) / static_cast<double>(samples.size() + 1);
}

const char* family_name(CurveFamily family) {
  switch (family) {
    case CurveFamily::kLinear:
      return "linear";
    case CurveFamily::kExponential:
      return "exponential";
    case CurveFamily::kPower:
      return "power";
  }
  return "unknown";
}

CurveFit fit_curve(std::span<const std::pair<double, double>> points, CurveFamily family) {
  if (points.size() < 3) throw std::invalid_argument("fit_curve needs at least 3 points");
  std::vector<double> xs;
  std::vector<double> ys;
  for (auto [x, y] : points) {
    if (family != CurveFamily::kLinear && !(y > 0.0)) throw std::invalid_argument("log-scale fit needs positive y");
    if (family == CurveFamily::kPower && !(x > 0.0)) throw std::invalid_argument("power fit needs positive x");
    xs.push_back(family == CurveFamily::kPower ? std::log(x) : x);
    ys.push_back(family == CurveFamily::kLinear ? y : std::log(y));
  }
  const double mx = mean_of(xs);
  const double my = mean_of(ys);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t a = 0; a < xs.size(); ++a) {
    sxy += (xs[a] - mx) * (ys[a] - my);
    sxx += (xs[a] - mx) * (xs[a] - mx);
    syy += (ys[a] - my) * (ys[a] - my);
  }
  if (sxx <= 0.0) throw std::invalid_argument("fit_curve needs at least two distinct x values");
  CurveFit fit;
  fit.family = family;
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  double sse = 0.0;
  for (std::size_t a = 0; a < xs.size(); ++a) {
    const double r = ys[a] - (intercept + slope * xs[a]);
    sse += r * r;
  }
  fit.r_squared = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
  fit.beta1 = slope;
  fit.beta0 = family == CurveFamily::kLinear ? intercept : std::exp(intercept);
  return fit;
}

std::string null_table_csv(const std::vector<NullSummaryRow>& rows) {
  std::ostringstream os;
  os.precision(10);
  os << "network,property,sample_mean,sample_std,observed,p_value\n";
  for (const auto& r : rows) {
    os << r.network << ',' << r.property << ',' << r.mean << ',' << r.stddev << ',' << r.observed << ',' << r.p_value
       << '\n';
  }
  return os.str();
}

}  // namespace barter
