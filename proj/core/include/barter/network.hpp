#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "barter/economy.hpp"
#include "barter/rational.hpp"
#include "barter/ser.hpp"

namespace barter {

struct Arc {
  int tail = 0;
  int head = 0;
};

// Undirected trade network over agents; each edge contributes the two arcs (h,k) and (k,h).
class TradeNetwork {
 public:
  TradeNetwork() = default;
  TradeNetwork(int n_agents, std::vector<std::pair<int, int>> edges, std::optional<IntMatrix> capacities = {});

  static TradeNetwork complete(int n);
  static TradeNetwork star(int n, int center = 0);
  static TradeNetwork ring(int n);
  static TradeNetwork path(int n);
  static TradeNetwork from_block(int n, const NetworkBlock& block);

  int n_agents() const { return n_; }
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }
  const std::vector<Arc>& arcs() const { return arcs_; }
  const std::optional<IntMatrix>& capacities() const { return capacities_; }
  bool adjacent(int h, int k) const;
  // Node-arc incidence: +1 at the head, -1 at the tail.
  IntMatrix incidence() const;
  std::vector<std::vector<int>> components() const;
  std::size_t arc_index(int tail, int head) const;

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> edges_;
  std::vector<Arc> arcs_;
  std::optional<IntMatrix> capacities_;
  std::vector<char> adj_;
};

struct FlowRecord {
  std::vector<Arc> arcs;
  // y[i][a]: weighted amount of commodity i moved along arc a.
  std::vector<std::vector<Rational>> y;
  // Remaining room x_bar - x when capacities are present.
  std::optional<IntMatrix> slacks;
};

struct NetworkSerResult {
  Allocation final_allocation;
  FlowRecord flows;
  TradeLog log;
  LyapunovSeries lyapunov;
  bool converged = false;
  std::vector<std::vector<int>> components;
  std::vector<std::string> warnings;
};

FlowRecord flows_from_log(const EconomyInstance& inst, const TradeNetwork& net, const TradeLog& log);
NetworkSerResult run_network_ser(const EconomyInstance& inst, const TradeNetwork& net, const SearchConfig& config);
bool check_flow_balance(const EconomyInstance& inst, const TradeNetwork& net, const Allocation& x_final,
                        const FlowRecord& flows);
std::string flow_csv(const FlowRecord& flows);

}  // namespace barter
