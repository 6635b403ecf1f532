#include "barter/network.hpp"

#include <algorithm>
#include <array>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>

namespace barter {
namespace {

std::size_t uz(int v) { return static_cast<std::size_t>(v); }

}  // namespace

TradeNetwork::TradeNetwork(int n_agents, std::vector<std::pair<int, int>> edges, std::optional<IntMatrix> capacities)
    : n_(n_agents), capacities_(std::move(capacities)), adj_(uz(n_agents) * uz(n_agents), 0) {
  if (n_agents <= 0) throw std::invalid_argument("network needs at least one agent");
  std::set<std::pair<int, int>> seen;
  for (auto [a, b] : edges) {
    if (a < 0 || b < 0 || a >= n_ || b >= n_) throw std::out_of_range("network edge out of range");
    if (a == b) throw std::invalid_argument("network self-loop");
    auto e = std::minmax(a, b);
    if (!seen.insert({e.first, e.second}).second) continue;
    edges_.emplace_back(e.first, e.second);
  }
  std::sort(edges_.begin(), edges_.end());
  for (auto [a, b] : edges_) {
    arcs_.push_back({a, b});
    arcs_.push_back({b, a});
    adj_[uz(a) * uz(n_) + uz(b)] = 1;
    adj_[uz(b) * uz(n_) + uz(a)] = 1;
  }
  if (capacities_ && capacities_->rows() != uz(n_)) throw std::invalid_argument("capacity rows must equal agents");
}

TradeNetwork TradeNetwork::complete(int n) {
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) e.emplace_back(a, b);
  }
  return TradeNetwork(n, e);
}

TradeNetwork TradeNetwork::star(int n, int center) {
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a < n; ++a) {
    if (a != center) e.emplace_back(center, a);
  }
  return TradeNetwork(n, e);
}

TradeNetwork TradeNetwork::ring(int n) {
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a < n; ++a) {
    if (n > 1 && (a + 1) % n != a) e.emplace_back(a, (a + 1) % n);
  }
  return TradeNetwork(n, e);
}

TradeNetwork TradeNetwork::path(int n) {
  std::vector<std::pair<int, int>> e;
  for (int a = 0; a + 1 < n; ++a) e.emplace_back(a, a + 1);
  return TradeNetwork(n, e);
}

TradeNetwork TradeNetwork::from_block(int n, const NetworkBlock& block) {
  return TradeNetwork(n, block.edges, block.capacities);
}

bool TradeNetwork::adjacent(int h, int k) const { return adj_[uz(h) * uz(n_) + uz(k)] != 0; }

std::size_t TradeNetwork::arc_index(int tail, int head) const {
  for (std::size_t a = 0; a < arcs_.size(); ++a) {
    if (arcs_[a].tail == tail && arcs_[a].head == head) return a;
  }
  throw std::out_of_range("no arc between the given agents");
}

IntMatrix TradeNetwork::incidence() const {
  IntMatrix a(uz(n_), arcs_.size(), 0);
  for (std::size_t c = 0; c < arcs_.size(); ++c) {
    a(uz(arcs_[c].head), c) += 1;
    a(uz(arcs_[c].tail), c) -= 1;
  }
  return a;
}

std::vector<std::vector<int>> TradeNetwork::components() const {
  std::vector<int> parent(uz(n_));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[uz(v)] != v) v = parent[uz(v)] = parent[uz(parent[uz(v)])];
    return v;
  };
  for (auto [a, b] : edges_) parent[uz(find(a))] = find(b);
  std::vector<std::vector<int>> out;
  std::vector<int> slot(uz(n_), -1);
  for (int v = 0; v < n_; ++v) {
    int r = find(v);
    if (slot[uz(r)] < 0) {
      slot[uz(r)] = static_cast<int>(out.size());
      out.emplace_back();
    }
    out[uz(slot[uz(r)])].push_back(v);
  }
  return out;
}

FlowRecord flows_from_log(const EconomyInstance& inst, const TradeNetwork& net, const TradeLog& log) {
  FlowRecord fr;
  fr.arcs = net.arcs();
  fr.y.assign(inst.m(), std::vector<Rational>(fr.arcs.size()));
  for (const auto& ev : log.events) {
    const auto dir = direction(inst, ev.h, ev.k, ev.i, ev.j);
    const std::array<int, 2> com{ev.i, ev.j};
    for (std::size_t c = 0; c < 2; ++c) {
      // Change of the k-side holdings decides the arc orientation.
      const std::int64_t dk = ev.alpha * dir.step[2 + c];
      if (dk == 0) continue;
      const int receiver = dk > 0 ? ev.k : ev.h;
      const int sender = dk > 0 ? ev.h : ev.k;
      const std::int64_t amount = dk > 0 ? dk : ev.alpha * dir.step[c];
      fr.y[uz(com[c])][net.arc_index(sender, receiver)] += inst.weights[uz(receiver)] * Rational(amount);
    }
  }
  return fr;
}

NetworkSerResult run_network_ser(const EconomyInstance& inst, const TradeNetwork& net, const SearchConfig& config) {
  require_valid(inst);
  if (net.n_agents() != inst.n_agents) throw std::invalid_argument("network size differs from the instance");
  EconomyInstance constrained = inst;
  if (net.capacities()) {
    const auto& cap = *net.capacities();
    if (cap.cols() != inst.m()) throw std::invalid_argument("network capacities must be n x m");
    IntMatrix merged = cap;
    if (inst.capacities) {
      for (std::size_t h = 0; h < inst.n(); ++h) {
        for (std::size_t j = 0; j < inst.m(); ++j) merged(h, j) = std::min(merged(h, j), (*inst.capacities)(h, j));
      }
    }
    constrained.capacities = merged;
  }
  require_valid(constrained);

  NetworkSerResult res;
  res.components = net.components();
  if (res.components.size() > 1) {
    res.warnings.push_back("network is disconnected (" + std::to_string(res.components.size()) +
                           " components); components trade as independent sub-economies");
  }
  std::vector<ERDirection> cands;
  for (auto& d : candidate_directions(inst)) {
    if (net.adjacent(d.h, d.k)) cands.push_back(std::move(d));
  }
  cands = order_candidates(std::move(cands), config.order_seed);
  SerResult ser = run_ser(constrained, config, cands);
  res.final_allocation = std::move(ser.final_allocation);
  res.log = std::move(ser.log);
  res.lyapunov = std::move(ser.lyapunov);
  res.converged = ser.converged;
  res.flows = flows_from_log(inst, net, res.log);
  if (constrained.capacities) {
    IntMatrix slack = *constrained.capacities;
    for (std::size_t h = 0; h < inst.n(); ++h) {
      for (std::size_t j = 0; j < inst.m(); ++j) slack(h, j) -= res.final_allocation(h, j);
    }
    res.flows.slacks = slack;
  }
  return res;
}

bool check_flow_balance(const EconomyInstance& inst, const TradeNetwork& net, const Allocation& x_final,
                        const FlowRecord& flows) {
  const auto& arcs = net.arcs();
  if (flows.y.size() != inst.m() || x_final.rows() != inst.n() || x_final.cols() != inst.m()) return false;
  for (std::size_t i = 0; i < inst.m(); ++i) {
    if (flows.y[i].size() != arcs.size()) return false;
    std::vector<Rational> lhs(inst.n());
    for (std::size_t a = 0; a < arcs.size(); ++a) {
      if (flows.y[i][a].sign() < 0) return false;
      lhs[uz(arcs[a].head)] += flows.y[i][a];
      lhs[uz(arcs[a].tail)] -= flows.y[i][a];
    }
    for (std::size_t h = 0; h < inst.n(); ++h) {
      Rational rhs = inst.weights[h] * Rational(x_final(h, i) - inst.endowments(h, i));
      if (lhs[h] != rhs) return false;
    }
  }
  return true;
}

std::string flow_csv(const FlowRecord& flows) {
  std::ostringstream os;
  os << "commodity,from,to,amount\n";
  for (std::size_t i = 0; i < flows.y.size(); ++i) {
    for (std::size_t a = 0; a < flows.arcs.size(); ++a) {
      if (flows.y[i][a].is_zero()) continue;
      os << i << ',' << flows.arcs[a].tail << ',' << flows.arcs[a].head << ',' << flows.y[i][a].to_string() << '\n';
    }
  }
  return os.str();
}

}  // namespace barter
