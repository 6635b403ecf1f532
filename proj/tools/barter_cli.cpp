// barter: instance generation, trading runs, path enumeration, interior-point solves and
// network statistics from the command line.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <stdexcept>
#include <string>

#include "CLI11.hpp"
#include "barter/errors.hpp"
#include "barter/experiment.hpp"
#include "barter/generator.hpp"
#include "barter/io.hpp"
#include "barter/ipm.hpp"
#include "barter/netstats.hpp"
#include "barter/network.hpp"
#include "barter/oracle.hpp"
#include "barter/pareto.hpp"
#include "barter/ser.hpp"

namespace fs = std::filesystem;
using namespace barter;

namespace {

enum ExitCode { kOk = 0, kInvalidInput = 1, kNotConverged = 2, kResourceLimit = 3 };

struct Common {
  std::string instance;
  std::string spec;
  std::uint64_t seed = 1;
  std::string mode = "first";
  std::string objective = "pareto";
  std::string out;
  std::string format = "csv";
};

// Writes to out/name when an output directory is given, otherwise to stdout.
void emit(const Common& opt, const std::string& name, const std::string& body) {
  if (opt.out.empty()) {
    std::cout << body;
    if (!body.empty() && body.back() != '\n') std::cout << '\n';
    return;
  }
  fs::create_directories(opt.out);
  std::ofstream f(fs::path(opt.out) / name);
  if (!f) throw std::runtime_error("cannot write " + (fs::path(opt.out) / name).string());
  f << body;
}

SearchConfig search_config(const Common& opt) {
  SearchConfig c;
  c.mode = opt.mode == "best" ? SearchMode::kBestImprove : SearchMode::kFirstImprove;
  c.objective = opt.objective == "welfare" ? Objective::kWelfare : Objective::kBilateralPareto;
  c.order_seed = 0;
  return c;
}

EconomyInstance load(const Common& opt) {
  if (opt.instance.empty()) throw std::invalid_argument("--instance is required");
  return read_instance(opt.instance);
}

int cmd_generate(const Common& opt, int n, int m, const FactorLevels& f, bool cara) {
  GeneratorOptions g;
  g.cara = cara;
  auto inst = generate_instance(n, m, opt.seed, f, g);
  emit(opt, "instance.json", instance_to_json(inst));
  return kOk;
}

int cmd_run(const Common& opt) {
  if (!opt.spec.empty()) {
    auto spec = read_experiment_spec(opt.spec);
    auto report = run_experiment(spec);
    if (opt.out.empty()) {
      for (const auto& [name, body] : report.tables) std::cout << "# " << name << '\n' << body;
      for (const auto& n : report.notes) std::cerr << n << '\n';
    } else {
      write_report(report, opt.out);
    }
    return kOk;
  }
  auto inst = load(opt);
  auto cfg = search_config(opt);
  SerResult res;
  std::optional<TradeNetwork> net;
  if (inst.network) {
    net = TradeNetwork::from_block(inst.n_agents, *inst.network);
    auto nres = run_network_ser(inst, *net, cfg);
    for (const auto& w : nres.warnings) std::cerr << "warning: " << w << '\n';
    emit(opt, "flows.csv", flow_csv(nres.flows));
    res.final_allocation = nres.final_allocation;
    res.log = nres.log;
    res.lyapunov = nres.lyapunov;
    res.converged = nres.converged;
  } else {
    res = run_ser(inst, cfg);
  }
  if (opt.format == "json") {
    emit(opt, "trade_log.json", trade_log_json(res.log));
  } else {
    emit(opt, "trade_log.csv", trade_log_csv(res.log));
    if (!opt.out.empty()) emit(opt, "lyapunov.csv", lyapunov_csv(res.lyapunov));
  }
  if (!opt.out.empty()) emit(opt, "final_allocation.txt", allocation_to_string(res.final_allocation));
  std::cerr << "accepted moves: " << res.log.erps_solved << ", converged: " << (res.converged ? "yes" : "no") << '\n';
  return res.converged ? kOk : kNotConverged;
}

int cmd_enumerate(const Common& opt, bool allocations, long long limit) {
  auto inst = opt.instance.empty() ? worked_example_instance() : load(opt);
  if (allocations) {
    auto res = enumerate_allocations(inst, BigInt(limit));
    std::string body;
    for (const auto& a : res.allocations) body += allocation_to_string(a) + "\n";
    emit(opt, "allocations.txt", body);
    std::cerr << "allocations: " << res.count << ", bound: " << res.bound.str() << '\n';
    return kOk;
  }
  auto res = enumerate_paths(inst);
  emit(opt, "path_enumeration.csv", frontier_csv(res));
  std::cerr << "waves: " << res.waves.size() << ", terminal allocations: " << res.terminal.allocations.size()
            << ", distinct utility vectors: " << res.terminal.utility_count() << '\n';
  return res.stabilized ? kOk : kNotConverged;
}

int cmd_solve_ipm(const Common& opt, double tol, int max_iter) {
  auto inst = opt.instance.empty() ? cara_pair_instance() : load(opt);
  IpmOptions o;
  o.tolerance = tol;
  o.max_iterations = max_iter;
  auto res = run_ipm(inst, o);
  emit(opt, "ipm_trace.csv", ipm_trace_csv(res));
  std::string alloc = "agent";
  for (int j = 0; j < inst.n_commodities; ++j) alloc += ",x" + std::to_string(j + 1);
  alloc += "\n";
  for (std::size_t h = 0; h < res.allocation.rows(); ++h) {
    alloc += std::to_string(h + 1);
    for (std::size_t j = 0; j < res.allocation.cols(); ++j) {
      char buf[64];
      std::snprintf(buf, sizeof buf, ",%.10g", res.allocation(h, j));
      alloc += buf;
    }
    alloc += "\n";
  }
  emit(opt, "ipm_allocation.csv", alloc);
  for (const auto& n : res.notes) std::cerr << n << '\n';
  std::cerr << "iterations: " << res.iterations << ", welfare: " << res.welfare
            << ", converged: " << (res.converged ? "yes" : "no") << '\n';
  return res.converged ? kOk : kNotConverged;
}

int cmd_stats(const Common& opt, std::size_t samples) {
  auto inst = load(opt);
  auto res = run_ser(inst, search_config(opt));
  std::vector<std::vector<double>> c_rows;
  for (const auto& u : inst.utilities) {
    std::vector<double> row;
    if (u.is_linear())
      for (const auto& c : u.linear) row.push_back(c.to_double());
    else
      row = u.cara;
    c_rows.push_back(row);
  }
  RealMatrix flow = res.log.flow;
  for (auto& v : flow.data()) v = std::round(v);
  std::vector<std::pair<std::string, ValuedNetwork>> nets{{"interaction", ValuedNetwork::from_counts(res.log.interaction)},
                                                          {"flow", ValuedNetwork(flow)}};
  std::vector<NullSummaryRow> rows;
  for (const auto& [label, net] : nets) {
    for (auto model : {NullModel::kFixedTotal, NullModel::kFixedRows}) {
      const std::string tag = model == NullModel::kFixedTotal ? "fixed_total" : "fixed_rows";
      auto ns = sample_null(net, model, samples, opt.seed);
      if (!ns.exact) std::cerr << "note: " << label << "/" << tag << " used the Markov chain fallback\n";
      auto stat = [&](const ValuedNetwork& g, const std::string& p) -> std::optional<double> {
        if (p == "AC") return strength_assortativity(g);
        if (p == "CC") return weighted_clustering(g);
        if (p == "CC_binary") return binary_clustering(g);
        if (p == "Type1") return assortativity(g, c_rows, AssortativityType::kType1);
        if (p == "Type2") return assortativity(g, c_rows, AssortativityType::kType2);
        return assortativity(g, c_rows, AssortativityType::kType3);
      };
      for (const std::string p : {"AC", "CC", "CC_binary", "Type1", "Type2", "Type3"}) {
        auto obs = stat(net, p);
        std::vector<double> vals;
        for (const auto& g : ns.networks)
          if (auto v = stat(g, p)) vals.push_back(*v);
        NullSummaryRow r;
        r.network = label + "/" + tag;
        r.property = p;
        if (!obs || vals.size() < 100) {
          std::cerr << "note: " << r.network << " " << p << " undefined\n";
          continue;
        }
        double mean = 0.0, var = 0.0;
        for (double v : vals) mean += v;
        mean /= static_cast<double>(vals.size());
        for (double v : vals) var += (v - mean) * (v - mean);
        r.mean = mean;
        r.stddev = std::sqrt(var / static_cast<double>(vals.size() - 1));
        r.observed = *obs;
        r.p_value = null_pvalue(*obs, vals, Tail::kLeft);
        rows.push_back(r);
      }
    }
  }
  emit(opt, "null_models.csv", null_table_csv(rows));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"barter: fixed-price bilateral exchange economies"};
  app.require_subcommand(1);
  Common opt;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--instance", opt.instance, "Instance JSON file");
    sub->add_option("--seed", opt.seed, "Master seed");
    sub->add_option("--mode", opt.mode, "Search mode")->check(CLI::IsMember({"first", "best"}));
    sub->add_option("--objective", opt.objective, "Acceptance objective")->check(CLI::IsMember({"pareto", "welfare"}));
    sub->add_option("--out", opt.out, "Output directory (stdout when omitted)");
    sub->add_option("--format", opt.format, "Trade log format")->check(CLI::IsMember({"csv", "json"}));
  };

  int n = 10, m = 10;
  FactorLevels factors;
  bool cara = false;
  auto* gen = app.add_subcommand("generate", "Generate a random instance");
  add_common(gen);
  gen->add_option("-n,--agents", n, "Number of agents")->check(CLI::PositiveNumber);
  gen->add_option("-m,--commodities", m, "Number of commodities")->check(CLI::PositiveNumber);
  gen->add_option("--price-sigma", factors.price_sigma, "Log-normal price variability");
  gen->add_option("--same-assoc", factors.same_assoc, "Endowment/own-utility rank association")->check(CLI::Range(0.0, 1.0));
  gen->add_option("--cross-assoc", factors.cross_assoc, "Endowment/partner-utility rank association")->check(CLI::Range(0.0, 1.0));
  gen->add_flag("--cara", cara, "Exponential utilities instead of linear");

  auto* run = app.add_subcommand("run", "Run a trading sequence or an experiment spec");
  add_common(run);
  run->add_option("--spec", opt.spec, "Experiment spec JSON");

  bool allocations = false;
  long long limit = 100000;
  auto* en = app.add_subcommand("enumerate", "Enumerate improving paths (or all feasible allocations)");
  add_common(en);
  en->add_flag("--allocations", allocations, "List every feasible integer allocation");
  en->add_option("--limit", limit, "Largest allocation-count bound accepted");

  double tol = 1e-6;
  int max_iter = 200;
  auto* ipm = app.add_subcommand("solve-ipm", "Solve the continuous relaxation by interior point");
  add_common(ipm);
  ipm->add_option("--tolerance", tol, "Scaled KKT tolerance");
  ipm->add_option("--max-iterations", max_iter, "Iteration limit");

  std::size_t samples = 1000;
  auto* st = app.add_subcommand("stats", "Network statistics of a trading run against null models");
  add_common(st);
  st->add_option("--samples", samples, "Null-model draws (at least 100)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kInvalidInput;
  }

  try {
    if (*gen) return cmd_generate(opt, n, m, factors, cara);
    if (*run) return cmd_run(opt);
    if (*en) return cmd_enumerate(opt, allocations, limit);
    if (*ipm) return cmd_solve_ipm(opt, tol, max_iter);
    if (*st) return cmd_stats(opt, samples);
  } catch (const LimitExceeded& e) {
    std::cerr << "resource limit: " << e.what() << '\n';
    return kResourceLimit;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvalidInput;
  }
  return kOk;
}
