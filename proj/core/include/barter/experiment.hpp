#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "barter/generator.hpp"
#include "barter/ser.hpp"

namespace barter {

enum class ExperimentKind { kSerVsBnb, kScaling, kFactors, kNetworkTopologies, kPathEnumeration, kIpmTrace };

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kScaling;
  std::vector<int> sizes;
  int replicates = 3;
  std::uint64_t seed = 1;
  std::vector<double> price_sigma_levels{0.0, 0.4, 0.8};
  std::vector<double> same_assoc_levels{0.0, 0.4, 0.8};
  std::vector<double> cross_assoc_levels{0.0, 0.4, 0.8};
  GeneratorOptions generator;
  SearchMode mode = SearchMode::kBestImprove;
  Objective objective = Objective::kWelfare;
  // Optional instance file used by path_enumeration and ipm_trace instead of a generated one.
  std::optional<std::filesystem::path> instance;
  std::size_t null_samples = 1000;
  std::int64_t bnb_node_limit = 200000;
};

struct ExperimentReport {
  // File name -> CSV contents.
  std::map<std::string, std::string> tables;
  std::vector<std::string> notes;
};

ExperimentKind parse_experiment_kind(const std::string& name);
const char* experiment_kind_name(ExperimentKind kind);

ExperimentSpec experiment_spec_from_json(const std::string& text);
ExperimentSpec read_experiment_spec(const std::filesystem::path& path);

// Runs the experiment; errors are rethrown with the instance seed attached.
ExperimentReport run_experiment(const ExperimentSpec& spec);
void write_report(const ExperimentReport& report, const std::filesystem::path& out_dir);

// The three-agent, three-commodity linear economy used throughout the examples.
EconomyInstance worked_example_instance();
// Two agents, two commodities, exponential utilities, prices (5,10), weights (5,6).
EconomyInstance cara_pair_instance();

}  // namespace barter
