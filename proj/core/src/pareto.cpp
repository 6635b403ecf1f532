#include "barter/pareto.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "barter/erp.hpp"
#include "barter/errors.hpp"
#include "barter/ser.hpp"

namespace barter {
namespace {

bool weakly_dominates(const UtilityVector& a, const UtilityVector& b) {
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c] < b[c]) return false;
  }
  return true;
}

std::string fmt_value(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

bool dominates(const UtilityVector& a, const UtilityVector& b) {
  if (a.size() != b.size()) throw std::invalid_argument("dimension mismatch");
  bool strict = false;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c] < b[c]) return false;
    if (a[c] > b[c]) strict = true;
  }
  return strict;
}

std::vector<std::size_t> pareto_filter_indices(const VectorSet& vs) {
  if (vs.empty()) throw std::invalid_argument("pareto_filter of an empty set");
  const std::size_t dim = vs.front().size();
  for (const auto& v : vs) {
    if (v.size() != dim) throw std::invalid_argument("dimension mismatch");
  }
  // Working list of candidate indices; survivors are moved to the front.
  std::vector<std::size_t> work(vs.size());
  for (std::size_t a = 0; a < work.size(); ++a) work[a] = a;
  std::size_t r = work.size();
  std::vector<std::size_t> kept;
  std::size_t i = 0;
  while (i < r) {
    bool discarded = false;
    std::size_t j = i + 1;
    while (j < r) {
      const auto& vi = vs[work[i]];
      const auto& vj = vs[work[j]];
      if (weakly_dominates(vj, vi) && !weakly_dominates(vi, vj)) {
        // v_i is dominated: drop it and continue with the next index.
        discarded = true;
        break;
      }
      if (weakly_dominates(vi, vj)) {
        // v_j dominated by or equal to v_i: replace it with the last vector.
        work[j] = work[r - 1];
        --r;
        continue;
      }
      ++j;
    }
    if (discarded) {
      work[i] = work[r - 1];
      --r;
      continue;
    }
    kept.push_back(work[i]);
    ++i;
  }
  // Duplicates keep their earliest occurrence.
  std::vector<std::size_t> out;
  for (std::size_t idx : kept) {
    std::size_t first = idx;
    for (std::size_t a = 0; a < idx; ++a) {
      if (vs[a] == vs[idx]) {
        first = a;
        break;
      }
    }
    out.push_back(first);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

VectorSet pareto_filter(const VectorSet& vs) {
  VectorSet out;
  for (auto idx : pareto_filter_indices(vs)) out.push_back(vs[idx]);
  return out;
}

std::size_t Frontier::utility_count() const {
  std::set<UtilityVector> s(utilities.begin(), utilities.end());
  return s.size();
}

PathEnumeration enumerate_paths(const EconomyInstance& inst, const PathEnumerationOptions& options) {
  require_valid(inst);
  if (!inst.all_linear()) throw std::invalid_argument("path enumeration supports linear utilities only");
  const auto cands = candidate_directions(inst);
  const UtilityVector origin = utilities(inst, inst.endowments);

  auto make_frontier = [&](const std::set<Allocation>& members, int wave) {
    std::vector<Allocation> allocs(members.begin(), members.end());
    VectorSet us;
    for (const auto& a : allocs) us.push_back(utilities(inst, a));
    VectorSet unique_us;
    {
      std::set<UtilityVector> seen;
      for (const auto& u : us) {
        if (seen.insert(u).second) unique_us.push_back(u);
      }
    }
    std::set<UtilityVector> keep;
    for (auto idx : pareto_filter_indices(unique_us)) keep.insert(unique_us[idx]);
    Frontier f;
    f.wave = wave;
    for (std::size_t a = 0; a < allocs.size(); ++a) {
      if (keep.count(us[a])) {
        f.allocations.push_back(allocs[a]);
        f.utilities.push_back(us[a]);
      }
    }
    return f;
  };

  PathEnumeration res;
  std::set<Allocation> current{inst.endowments};
  res.waves.push_back(make_frontier(current, 0));
  for (int wave = 1; wave <= options.max_waves; ++wave) {
    std::set<Allocation> pool(current.begin(), current.end());
    for (const auto& x : current) {
      for (const auto& dir : cands) {
        const auto range = step_interval(inst, x, dir);
        for (std::int64_t a : {range.lo_int, range.hi_int}) {
          if (a == 0) continue;
          ++res.expansions;
          Allocation y = dir.applied(x, a);
          if (weakly_dominates(utilities(inst, y), origin)) pool.insert(y);
        }
      }
    }
    Frontier f = make_frontier(pool, wave);
    std::set<Allocation> next(f.allocations.begin(), f.allocations.end());
    res.waves.push_back(f);
    if (next == current) {
      res.stabilized = true;
      break;
    }
    if (next.size() > options.max_frontier) throw LimitExceeded("path enumeration frontier limit exceeded");
    current = std::move(next);
  }
  res.terminal = res.waves.back();
  return res;
}

std::string frontier_csv(const PathEnumeration& result) {
  std::ostringstream os;
  os << "wave,member,allocation,utilities\n";
  for (const auto& f : result.waves) {
    for (std::size_t a = 0; a < f.allocations.size(); ++a) {
      os << f.wave << ',' << a << ",\"";
      const auto& x = f.allocations[a];
      for (std::size_t h = 0; h < x.rows(); ++h) {
        if (h) os << " | ";
        for (std::size_t j = 0; j < x.cols(); ++j) os << (j ? " " : "") << x(h, j);
      }
      os << "\",\"";
      for (std::size_t h = 0; h < f.utilities[a].size(); ++h) os << (h ? " " : "") << fmt_value(f.utilities[a][h]);
      os << "\"\n";
    }
  }
  return os.str();
}

}  // namespace barter
