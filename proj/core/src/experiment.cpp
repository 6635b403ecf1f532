#include "barter/experiment.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "barter/io.hpp"
#include "barter/ipm.hpp"
#include "barter/netstats.hpp"
#include "barter/network.hpp"
#include "barter/oracle.hpp"
#include "barter/pareto.hpp"
#include "barter/random.hpp"
#include "json.hpp"

namespace barter {
namespace {

std::string num(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

std::uint64_t instance_seed(const ExperimentSpec& spec, std::string_view stage, std::uint64_t index) {
  return derive_seed(spec.seed, stage, index);
}

template <class F>
auto with_seed(std::uint64_t seed, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const LimitExceeded& e) {
    throw LimitExceeded(std::string(e.what()) + " (instance seed " + std::to_string(seed) + ")");
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string(e.what()) + " (instance seed " + std::to_string(seed) + ")");
  } catch (const std::exception& e) {
    throw std::runtime_error(std::string(e.what()) + " (instance seed " + std::to_string(seed) + ")");
  }
}

double sum_utility(const EconomyInstance& inst, const Allocation& x) {
  return welfare(utilities(inst, x), Criterion::kSum);
}

std::vector<int> sizes_or(const ExperimentSpec& spec, std::vector<int> fallback) {
  return spec.sizes.empty() ? fallback : spec.sizes;
}

SearchConfig config_of(const ExperimentSpec& spec, SearchMode mode) {
  SearchConfig c;
  c.mode = mode;
  c.objective = spec.objective;
  return c;
}

ExperimentReport ser_vs_bnb(const ExperimentSpec& spec) {
  ExperimentReport rep;
  std::ostringstream os;
  os << "size,replicate,seed,initial_welfare,neighborhood,erps_first,erps_best,welfare_first,welfare_best,"
        "welfare_optimal\n";
  std::uint64_t idx = 0;
  for (int size : sizes_or(spec, {4, 5, 6})) {
    for (int r = 0; r < spec.replicates; ++r, ++idx) {
      const auto seed = instance_seed(spec, "ser_vs_bnb", idx);
      with_seed(seed, [&] {
        auto inst = generate_instance(size, size, seed, {}, spec.generator);
        auto first = run_ser(inst, config_of(spec, SearchMode::kFirstImprove));
        auto best = run_ser(inst, config_of(spec, SearchMode::kBestImprove));
        std::string opt;
        try {
          BnbOptions bo;
          bo.node_limit = spec.bnb_node_limit;
          bo.individual_rationality = spec.objective == Objective::kBilateralPareto;
          opt = num(branch_and_bound_linear(inst, bo).welfare.to_double());
        } catch (const LimitExceeded&) {
          rep.notes.push_back("branch-and-bound node limit hit for size " + std::to_string(size) + " replicate " +
                              std::to_string(r));
        }
        os << size << ',' << r << ',' << seed << ',' << num(sum_utility(inst, inst.endowments)) << ','
           << num(first.log.neighborhood_explored) << ',' << first.log.erps_solved << ',' << best.log.erps_solved
           << ',' << num(sum_utility(inst, first.final_allocation)) << ','
           << num(sum_utility(inst, best.final_allocation)) << ',' << opt << '\n';
        return 0;
      });
    }
  }
  rep.tables["ser_vs_bnb.csv"] = os.str();
  return rep;
}

ExperimentReport scaling(const ExperimentSpec& spec) {
  ExperimentReport rep;
  std::ostringstream os;
  os << "size,replicate,seed,erps,converged\n";
  std::vector<std::pair<double, double>> pts;
  std::uint64_t idx = 0;
  std::vector<int> sizes = sizes_or(spec, {6, 7, 8, 9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20});
  for (int size : sizes) {
    for (int r = 0; r < spec.replicates; ++r, ++idx) {
      const auto seed = instance_seed(spec, "scaling", idx);
      with_seed(seed, [&] {
        auto inst = generate_instance(size, size, seed, {}, spec.generator);
        auto res = run_ser(inst, config_of(spec, spec.mode));
        os << size << ',' << r << ',' << seed << ',' << res.log.erps_solved << ',' << (res.converged ? 1 : 0) << '\n';
        pts.emplace_back(size, static_cast<double>(res.log.erps_solved));
        return 0;
      });
    }
  }
  rep.tables["scaling.csv"] = os.str();
  std::ostringstream fits;
  fits << "family,beta0,beta1,r_squared\n";
  for (auto fam : {CurveFamily::kLinear, CurveFamily::kExponential, CurveFamily::kPower}) {
    try {
      auto f = fit_curve(pts, fam);
      fits << family_name(fam) << ',' << num(f.beta0) << ',' << num(f.beta1) << ',' << num(f.r_squared) << '\n';
    } catch (const std::invalid_argument& e) {
      rep.notes.push_back(std::string(family_name(fam)) + " fit skipped: " + e.what());
    }
  }
  rep.tables["scaling_fits.csv"] = fits.str();
  return rep;
}

ExperimentReport factors(const ExperimentSpec& spec) {
  ExperimentReport rep;
  std::ostringstream os;
  os << "fact1,fact2,fact3,replicate,seed,resp1_nondominated,resp2_neighborhoods\n";
  const int size = spec.sizes.empty() ? 3 : spec.sizes.front();
  if (size > 3) rep.notes.push_back("path enumeration above 3x3 may be slow");
  std::uint64_t idx = 0;
  for (double f1 : spec.price_sigma_levels) {
    for (double f2 : spec.same_assoc_levels) {
      for (double f3 : spec.cross_assoc_levels) {
        for (int r = 0; r < spec.replicates; ++r, ++idx) {
          const auto seed = instance_seed(spec, "factors", idx);
          with_seed(seed, [&] {
            auto inst = generate_instance(size, size, seed, {f1, f2, f3}, spec.generator);
            auto paths = enumerate_paths(inst);
            SearchConfig cfg;
            cfg.mode = SearchMode::kFirstImprove;
            cfg.objective = Objective::kBilateralPareto;
            auto ser = run_ser(inst, cfg);
            os << num(f1) << ',' << num(f2) << ',' << num(f3) << ',' << r << ',' << seed << ','
               << paths.terminal.utility_count() << ',' << num(ser.log.neighborhood_explored) << '\n';
            return 0;
          });
        }
      }
    }
  }
  rep.tables["factors.csv"] = os.str();
  return rep;
}

std::vector<double> null_statistic(const std::vector<ValuedNetwork>& nets, const std::string& property,
                                   const std::vector<std::vector<double>>& c_rows) {
  std::vector<double> out;
  for (const auto& n : nets) {
    std::optional<double> v;
    if (property == "AC") v = strength_assortativity(n);
    if (property == "CC") v = weighted_clustering(n);
    if (property == "CC_binary") v = binary_clustering(n);
    if (property == "Type1") v = assortativity(n, c_rows, AssortativityType::kType1);
    if (property == "Type2") v = assortativity(n, c_rows, AssortativityType::kType2);
    if (property == "Type3") v = assortativity(n, c_rows, AssortativityType::kType3);
    if (v) out.push_back(*v);
  }
  return out;
}

std::vector<NullSummaryRow> null_rows(const std::string& label, const ValuedNetwork& net,
                                      const std::vector<std::vector<double>>& c_rows, NullModel model,
                                      std::size_t samples, std::uint64_t seed, bool& exact) {
  std::vector<NullSummaryRow> rows;
  NullSample ns = sample_null(net, model, samples, seed);
  exact = ns.exact;
  for (const std::string prop : {"AC", "CC", "CC_binary", "Type1", "Type2", "Type3"}) {
    auto obs = null_statistic({net}, prop, c_rows);
    auto sample = null_statistic(ns.networks, prop, c_rows);
    if (obs.empty() || sample.size() < 100) continue;
    NullSummaryRow r;
    r.network = label;
    r.property = prop;
    r.observed = obs.front();
    double mean = 0.0;
    for (double v : sample) mean += v;
    mean /= static_cast<double>(sample.size());
    double var = 0.0;
    for (double v : sample) var += (v - mean) * (v - mean);
    r.mean = mean;
    r.stddev = std::sqrt(var / static_cast<double>(sample.size() - 1));
    r.p_value = null_pvalue(r.observed, sample, Tail::kLeft);
    rows.push_back(r);
  }
  return rows;
}

ExperimentReport network_topologies(const ExperimentSpec& spec) {
  ExperimentReport rep;
  std::ostringstream os;
  os << "topology,replicate,seed,accepted_moves,converged,final_welfare,flow_balanced\n";
  const int n = spec.sizes.empty() ? 6 : spec.sizes.front();
  const int m = spec.sizes.size() > 1 ? spec.sizes[1] : 3;
  SearchConfig cfg;
  cfg.mode = SearchMode::kFirstImprove;
  cfg.objective = Objective::kBilateralPareto;
  std::map<std::string, std::vector<std::int64_t>> moves;
  int star_le_ring = 0;
  for (int r = 0; r < spec.replicates; ++r) {
    const auto seed = instance_seed(spec, "network_topologies", static_cast<std::uint64_t>(r));
    with_seed(seed, [&] {
      auto inst = generate_instance(n, m, seed, {}, spec.generator);
      const std::vector<std::pair<std::string, TradeNetwork>> nets{{"complete", TradeNetwork::complete(n)},
                                                                   {"star", TradeNetwork::star(n)},
                                                                   {"ring", TradeNetwork::ring(n)},
                                                                   {"path", TradeNetwork::path(n)}};
      for (const auto& [name, net] : nets) {
        auto res = run_network_ser(inst, net, cfg);
        moves[name].push_back(res.log.erps_solved);
        os << name << ',' << r << ',' << seed << ',' << res.log.erps_solved << ',' << (res.converged ? 1 : 0) << ','
           << num(sum_utility(inst, res.final_allocation)) << ','
           << (check_flow_balance(inst, net, res.final_allocation, res.flows) ? 1 : 0) << '\n';
      }
      if (moves["star"].back() <= moves["ring"].back()) ++star_le_ring;
      return 0;
    });
  }
  rep.tables["network_topologies.csv"] = os.str();
  std::ostringstream summary;
  summary << "topology,mean_accepted_moves\n";
  for (const auto& [name, v] : moves) {
    double mean = 0.0;
    for (auto e : v) mean += static_cast<double>(e);
    summary << name << ',' << num(v.empty() ? 0.0 : mean / static_cast<double>(v.size())) << '\n';
  }
  summary << "star_le_ring_fraction," << num(spec.replicates ? double(star_le_ring) / spec.replicates : 0.0) << '\n';
  rep.tables["network_summary.csv"] = summary.str();

  // Statistics of the interaction and flow networks of one larger complete-network run.
  const auto seed = instance_seed(spec, "network_null", 0);
  with_seed(seed, [&] {
    const int big = std::max(n, 10);
    auto inst = generate_instance(big, 5, seed, {}, spec.generator);
    auto res = run_ser(inst, cfg);
    std::vector<std::vector<double>> c_rows;
    for (const auto& u : inst.utilities) {
      std::vector<double> row;
      for (const auto& c : u.linear) row.push_back(c.to_double());
      c_rows.push_back(row);
    }
    RealMatrix flow_int = res.log.flow;
    for (auto& v : flow_int.data()) v = std::round(v);
    std::vector<NullSummaryRow> rows;
    for (auto model : {NullModel::kFixedTotal, NullModel::kFixedRows}) {
      const std::string tag = model == NullModel::kFixedTotal ? "fixed_total" : "fixed_rows";
      bool exact = true;
      auto a = null_rows("interaction/" + tag, ValuedNetwork::from_counts(res.log.interaction), c_rows, model,
                         spec.null_samples, derive_seed(seed, tag + ".interaction"), exact);
      if (!exact) rep.notes.push_back(tag + " interaction null used the Markov chain fallback");
      auto b = null_rows("flow/" + tag, ValuedNetwork(flow_int), c_rows, model, spec.null_samples,
                         derive_seed(seed, tag + ".flow"), exact);
      if (!exact) rep.notes.push_back(tag + " flow null used the Markov chain fallback");
      rows.insert(rows.end(), a.begin(), a.end());
      rows.insert(rows.end(), b.begin(), b.end());
    }
    rep.notes.push_back("null samples are exact-uniform draws (stars and bars / row-composition rejection); flow "
                        "values rounded to integers");
    rep.tables["null_models.csv"] = null_table_csv(rows);
    return 0;
  });
  return rep;
}

EconomyInstance instance_for(const ExperimentSpec& spec, EconomyInstance fallback) {
  if (spec.instance) return read_instance(*spec.instance);
  return fallback;
}

ExperimentReport path_enumeration(const ExperimentSpec& spec) {
  ExperimentReport rep;
  auto inst = instance_for(spec, worked_example_instance());
  auto res = enumerate_paths(inst);
  rep.tables["path_enumeration.csv"] = frontier_csv(res);
  rep.notes.push_back("terminal frontier: " + std::to_string(res.terminal.allocations.size()) + " allocations, " +
                      std::to_string(res.terminal.utility_count()) + " utility vectors");
  return rep;
}

ExperimentReport ipm_trace(const ExperimentSpec& spec) {
  ExperimentReport rep;
  EconomyInstance fallback = spec.sizes.empty()
                                 ? cara_pair_instance()
                                 : generate_instance(spec.sizes.front(), spec.sizes.front(),
                                                     instance_seed(spec, "ipm_trace", 0), {}, spec.generator);
  auto inst = instance_for(spec, fallback);
  auto res = run_ipm(inst);
  rep.tables["ipm_trace.csv"] = ipm_trace_csv(res);
  rep.notes.push_back(std::string("ipm ") + (res.converged ? "converged" : "did not converge") + " after " +
                      std::to_string(res.iterations) + " iterations, welfare " + num(res.welfare));
  for (const auto& n : res.notes) rep.notes.push_back(n);
  return rep;
}

}  // namespace

ExperimentKind parse_experiment_kind(const std::string& name) {
  if (name == "ser_vs_bnb") return ExperimentKind::kSerVsBnb;
  if (name == "scaling") return ExperimentKind::kScaling;
  if (name == "factors") return ExperimentKind::kFactors;
  if (name == "network_topologies") return ExperimentKind::kNetworkTopologies;
  if (name == "path_enumeration") return ExperimentKind::kPathEnumeration;
  if (name == "ipm_trace") return ExperimentKind::kIpmTrace;
  throw std::invalid_argument("unknown experiment kind '" + name + "'");
}

const char* experiment_kind_name(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kSerVsBnb:
      return "ser_vs_bnb";
    case ExperimentKind::kScaling:
      return "scaling";
    case ExperimentKind::kFactors:
      return "factors";
    case ExperimentKind::kNetworkTopologies:
      return "network_topologies";
    case ExperimentKind::kPathEnumeration:
      return "path_enumeration";
    case ExperimentKind::kIpmTrace:
      return "ipm_trace";
  }
  return "unknown";
}

ExperimentSpec experiment_spec_from_json(const std::string& text) {
  using nlohmann::json;
  try {
    const json j = json::parse(text);
    ExperimentSpec s;
    s.kind = parse_experiment_kind(j.at("kind").get<std::string>());
    if (j.contains("sizes")) s.sizes = j["sizes"].get<std::vector<int>>();
    s.replicates = j.value("replicates", s.replicates);
    s.seed = j.value("seed", s.seed);
    if (j.contains("factors")) {
      const auto& f = j["factors"];
      if (f.contains("price_sigma")) s.price_sigma_levels = f["price_sigma"].get<std::vector<double>>();
      if (f.contains("same_assoc")) s.same_assoc_levels = f["same_assoc"].get<std::vector<double>>();
      if (f.contains("cross_assoc")) s.cross_assoc_levels = f["cross_assoc"].get<std::vector<double>>();
    }
    if (j.contains("generator")) {
      const auto& g = j["generator"];
      s.generator.max_endowment = g.value("max_endowment", s.generator.max_endowment);
      s.generator.max_coefficient = g.value("max_coefficient", s.generator.max_coefficient);
      s.generator.base_price = g.value("base_price", s.generator.base_price);
      s.generator.cara = g.value("utility", std::string("linear")) == "cara";
    }
    if (j.contains("mode")) {
      const auto m = j["mode"].get<std::string>();
      if (m != "first" && m != "best") throw std::invalid_argument("mode must be first or best");
      s.mode = m == "first" ? SearchMode::kFirstImprove : SearchMode::kBestImprove;
    }
    if (j.contains("objective")) {
      const auto o = j["objective"].get<std::string>();
      if (o != "pareto" && o != "welfare") throw std::invalid_argument("objective must be pareto or welfare");
      s.objective = o == "pareto" ? Objective::kBilateralPareto : Objective::kWelfare;
    }
    if (j.contains("instance")) s.instance = j["instance"].get<std::string>();
    s.null_samples = j.value("null_samples", s.null_samples);
    s.bnb_node_limit = j.value("bnb_node_limit", s.bnb_node_limit);
    if (s.replicates <= 0) throw std::invalid_argument("replicates must be positive");
    return s;
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("experiment spec error: ") + e.what());
  }
}

ExperimentSpec read_experiment_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open experiment spec " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  auto spec = experiment_spec_from_json(ss.str());
  if (spec.instance && spec.instance->is_relative()) spec.instance = path.parent_path() / *spec.instance;
  return spec;
}

ExperimentReport run_experiment(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case ExperimentKind::kSerVsBnb:
      return ser_vs_bnb(spec);
    case ExperimentKind::kScaling:
      return scaling(spec);
    case ExperimentKind::kFactors:
      return factors(spec);
    case ExperimentKind::kNetworkTopologies:
      return network_topologies(spec);
    case ExperimentKind::kPathEnumeration:
      return path_enumeration(spec);
    case ExperimentKind::kIpmTrace:
      return ipm_trace(spec);
  }
  throw std::invalid_argument("unknown experiment kind");
}

void write_report(const ExperimentReport& report, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  for (const auto& [name, body] : report.tables) {
    std::ofstream out(out_dir / name);
    if (!out) throw std::runtime_error("cannot write " + (out_dir / name).string());
    out << body;
  }
  std::ofstream notes(out_dir / "notes.txt");
  for (const auto& n : report.notes) notes << n << '\n';
}

EconomyInstance worked_example_instance() {
  EconomyInstance inst;
  inst.n_agents = 3;
  inst.n_commodities = 3;
  inst.prices = {1, 1, 1};
  inst.weights = {1, 1, 1};
  inst.endowments = IntMatrix::from_rows({{18, 3, 3}, {13, 4, 55}, {22, 2, 2}});
  inst.utilities = {UtilitySpec::Linear({75, 11, 13}), UtilitySpec::Linear({4, 3, 9}), UtilitySpec::Linear({55, 2, 3})};
  return inst;
}

EconomyInstance cara_pair_instance() {
  EconomyInstance inst;
  inst.n_agents = 2;
  inst.n_commodities = 2;
  inst.prices = {5, 10};
  inst.weights = {5, 6};
  inst.endowments = IntMatrix::from_rows({{40, 188}, {142, 66}});
  inst.utilities = {UtilitySpec::Cara({0.051, 0.011}, 2.0), UtilitySpec::Cara({0.1, 0.031}, 2.0)};
  return inst;
}

}  // namespace barter
