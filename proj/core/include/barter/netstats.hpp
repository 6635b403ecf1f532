#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "barter/matrix.hpp"

namespace barter {

// Symmetric nonnegative agent-by-agent matrix with zero diagonal.
class ValuedNetwork {
 public:
  ValuedNetwork() = default;
  explicit ValuedNetwork(RealMatrix matrix);
  static ValuedNetwork from_counts(const IntMatrix& counts);

  std::size_t n() const { return w_.rows(); }
  double weight(std::size_t h, std::size_t k) const { return w_(h, k); }
  const RealMatrix& matrix() const { return w_; }
  std::vector<double> strengths() const;
  std::size_t degree(std::size_t h) const;
  double total() const;

 private:
  RealMatrix w_;
};

enum class AssortativityType { kType1, kType2, kType3 };

std::optional<double> pearson(std::span<const double> x, std::span<const double> y);

// Type1: corr(|c^h - c^k|, x_hk); Type2: corr(|f_h - f_k|, x_hk); Type3: corr(|c^h - c^k|, |f_h - f_k|),
// over unordered pairs h < k. nullopt when a side has zero variance.
std::optional<double> assortativity(const ValuedNetwork& net, const std::vector<std::vector<double>>& c_rows,
                                    AssortativityType type);
// Edge-weighted correlation of endpoint strengths.
std::optional<double> strength_assortativity(const ValuedNetwork& net);

// Barrat weighted clustering averaged over nodes with at least one edge (degree-1 nodes count 0).
double weighted_clustering(const ValuedNetwork& net);
// Unweighted local clustering of the support graph, averaged the same way.
double binary_clustering(const ValuedNetwork& net);

enum class NullModel { kFixedTotal, kFixedRows };

struct NullSample {
  std::vector<ValuedNetwork> networks;
  // False when the row-sum sampler fell back to a Markov chain.
  bool exact = true;
};

NullSample sample_null(const ValuedNetwork& net, NullModel model, std::size_t samples, std::uint64_t seed,
                       std::size_t rejection_attempts = 20000);

enum class Tail { kLeft, kRight };

double null_pvalue(double observed, std::span<const double> samples, Tail tail);

enum class CurveFamily { kLinear, kExponential, kPower };

struct CurveFit {
  CurveFamily family = CurveFamily::kLinear;
  double beta0 = 0.0;
  double beta1 = 0.0;
  double r_squared = 0.0;
};

CurveFit fit_curve(std::span<const std::pair<double, double>> points, CurveFamily family);
const char* family_name(CurveFamily family);

struct NullSummaryRow {
  std::string network;
  std::string property;
  double mean = 0.0;
  double stddev = 0.0;
  double observed = 0.0;
  double p_value = 0.0;
};

std::string null_table_csv(const std::vector<NullSummaryRow>& rows);

}  // namespace barter
