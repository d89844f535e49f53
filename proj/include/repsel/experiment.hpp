#pragma once

#include <json.hpp>
#include <memory>

#include "repsel/oracle.hpp"
#include "repsel/population.hpp"
#include "repsel/selectors.hpp"

namespace repsel {

struct BehaviorConfig {
  std::string kind = "imitate";  // proxy | imitate | endpoint
  double rho_max = 0.0;
  std::string endpoint_url;
  std::string endpoint_model = "default";
  std::string prompt_template;
  double temperature = 1.0;
  double timeout_sec = 30.0;
  int retries = 2;
  int max_in_flight = 4;
};

std::unique_ptr<BehaviorModel> make_behavior_model(const BehaviorConfig& config);

struct RunConfig {
  std::optional<GeneratorSpec> generator;  // exactly one population source
  std::string population_path;
  std::optional<double> split_fraction;  // re-split file populations
  std::uint64_t split_seed = 0;
  std::vector<std::string> methods = {"reppop-mapped-2", "random"};
  std::vector<int> m_values = {1, 3, 5};
  int k = 3;
  std::vector<std::uint64_t> seeds = {1, 2, 3};
  double psi = 1.0;
  int alpha = 0;
  int pool_target = 0;
  std::optional<double> d_max_override;
  BehaviorConfig behavior;
  std::string out_dir = "out";
  int workers = 1;
  std::uint64_t opt_budget = 2'000'000;
};

RunConfig run_config_from_json(const nlohmann::json& doc);
GeneratorSpec generator_spec_from_json(const nlohmann::json& doc);
nlohmann::json generator_spec_to_json(const GeneratorSpec& spec);

Population resolve_population(const RunConfig& config);

/// One (method, M, seed) experiment cell: selection on train embeddings,
/// evaluation on both splits via re-materialized contexts.
struct CellResult {
  std::string method;
  int m = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error_message;
  double train_gap = 0.0, train_error = 0.0, train_f = 0.0;
  double test_gap = 0.0, test_error = 0.0, test_f = 0.0;
  double wall_time_sec = 0.0;
};

SelectionResult run_method(const Population& pop, const BehaviorModel& model,
                           const SelectorConfig& cfg, const std::string& method,
                           std::uint64_t opt_budget);

std::vector<CellResult> execute_cells(const RunConfig& config, const Population& pop);

/// Deterministic CSV body: rows sorted by (method, M, seed, split), fixed
/// float formatting, no timestamps.
std::string render_results_csv(const std::vector<CellResult>& cells, const RunConfig& config);
nlohmann::json summarize_cells(const std::vector<CellResult>& cells);

struct VerifyConfig {
  int submodularity_instances = 100;
  int submodularity_trials = 12;
  int greedy_instances = 200;
  int mapped_bound_instances = 50;
  std::vector<double> rho_values = {0.0, 0.1, 0.3};
  std::uint64_t seed = 7;
  std::string out_dir = "out";
};

nlohmann::json run_verification(const VerifyConfig& config);

// CLI entry points. Exit codes: 0 success, 1 config error, 2 partial
// failures present in the report.
int cmd_run(const RunConfig& config);
int cmd_verify(const VerifyConfig& config);
int cmd_generate(const GeneratorSpec& spec, const std::string& out_path);
int cmd_describe(const std::string& path);

}  // namespace repsel
