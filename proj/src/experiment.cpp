#include "repsel/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "repsel/embedding.hpp"
#include "repsel/io.hpp"
#include "repsel/objective.hpp"
#include "repsel/rng.hpp"

#ifdef REPSEL_WITH_ENDPOINT
#include "repsel/endpoint.hpp"
#endif

namespace repsel {

using nlohmann::json;

std::unique_ptr<BehaviorModel> make_behavior_model(const BehaviorConfig& config) {
  if (config.kind == "imitate") return std::make_unique<ImitationModel>();
  if (config.kind == "proxy") return std::make_unique<NoisyProxyModel>(config.rho_max);
  if (config.kind == "endpoint") {
#ifdef REPSEL_WITH_ENDPOINT
    EndpointConfig endpoint;
    endpoint.base_url = config.endpoint_url;
    endpoint.model = config.endpoint_model;
    endpoint.prompt_template = config.prompt_template;
    endpoint.temperature = config.temperature;
    endpoint.timeout_sec = config.timeout_sec;
    endpoint.retries = config.retries;
    endpoint.max_in_flight = config.max_in_flight;
    return std::make_unique<EndpointModel>(std::move(endpoint));
#else
    throw std::invalid_argument("this build has no endpoint support");
#endif
  }
  throw std::invalid_argument("unknown behavior model '" + config.kind +
                              "' (expected proxy, imitate or endpoint)");
}

GeneratorSpec generator_spec_from_json(const json& doc) {
  GeneratorSpec spec;
  if (doc.contains("scheme")) spec.scheme = scheme_from_string(doc["scheme"].get<std::string>());
  if (doc.contains("n_humans")) spec.n_humans = doc["n_humans"].get<int>();
  if (doc.contains("n_tasks")) spec.n_tasks = doc["n_tasks"].get<int>();
  if (doc.contains("n_clusters")) spec.n_clusters = doc["n_clusters"].get<int>();
  if (doc.contains("cluster_spread")) spec.cluster_spread = doc["cluster_spread"].get<double>();
  if (doc.contains("cluster_skill")) {
    spec.cluster_skill = doc["cluster_skill"].get<std::vector<double>>();
  }
  if (doc.contains("cluster_means")) {
    spec.cluster_means = doc["cluster_means"].get<std::vector<std::vector<double>>>();
  }
  if (doc.contains("continuous_dim")) spec.continuous_dim = doc["continuous_dim"].get<int>();
  if (doc.contains("train_fraction")) spec.train_fraction = doc["train_fraction"].get<double>();
  if (doc.contains("seed")) spec.seed = doc["seed"].get<std::uint64_t>();
  if (doc.contains("aggregator")) {
    spec.aggregator = doc["aggregator"].get<std::string>() == "concat"
                          ? ContinuousAggregator::concat
                          : ContinuousAggregator::mean;
  }
  if (doc.contains("d_max")) spec.d_max_override = doc["d_max"].get<double>();
  return spec;
}

json generator_spec_to_json(const GeneratorSpec& spec) {
  json doc;
  doc["scheme"] = to_string(spec.scheme);
  doc["n_humans"] = spec.n_humans;
  doc["n_tasks"] = spec.n_tasks;
  doc["n_clusters"] = spec.n_clusters;
  doc["cluster_spread"] = spec.cluster_spread;
  if (!spec.cluster_skill.empty()) doc["cluster_skill"] = spec.cluster_skill;
  if (!spec.cluster_means.empty()) doc["cluster_means"] = spec.cluster_means;
  if (spec.scheme == Scheme::continuous) doc["continuous_dim"] = spec.continuous_dim;
  doc["train_fraction"] = spec.train_fraction;
  doc["seed"] = spec.seed;
  if (spec.aggregator == ContinuousAggregator::concat) doc["aggregator"] = "concat";
  if (spec.d_max_override) doc["d_max"] = *spec.d_max_override;
  return doc;
}

RunConfig run_config_from_json(const json& doc) {
  RunConfig config;
  if (doc.contains("population")) {
    const auto& pop = doc["population"];
    if (pop.contains("generator")) config.generator = generator_spec_from_json(pop["generator"]);
    if (pop.contains("path")) config.population_path = pop["path"].get<std::string>();
  }
  if (doc.contains("split")) {
    config.split_fraction = doc["split"].at("fraction").get<double>();
    if (doc["split"].contains("seed")) {
      config.split_seed = doc["split"]["seed"].get<std::uint64_t>();
    }
  }
  if (doc.contains("methods")) config.methods = doc["methods"].get<std::vector<std::string>>();
  if (doc.contains("m_values")) config.m_values = doc["m_values"].get<std::vector<int>>();
  if (doc.contains("k")) config.k = doc["k"].get<int>();
  if (doc.contains("seeds")) config.seeds = doc["seeds"].get<std::vector<std::uint64_t>>();
  if (doc.contains("psi")) config.psi = doc["psi"].get<double>();
  if (doc.contains("alpha")) config.alpha = doc["alpha"].get<int>();
  if (doc.contains("pool_target")) config.pool_target = doc["pool_target"].get<int>();
  if (doc.contains("d_max")) config.d_max_override = doc["d_max"].get<double>();
  if (doc.contains("behavior")) {
    const auto& b = doc["behavior"];
    if (b.contains("kind")) config.behavior.kind = b["kind"].get<std::string>();
    if (b.contains("rho_max")) config.behavior.rho_max = b["rho_max"].get<double>();
    if (b.contains("endpoint_url")) config.behavior.endpoint_url = b["endpoint_url"].get<std::string>();
    if (b.contains("endpoint_model")) {
      config.behavior.endpoint_model = b["endpoint_model"].get<std::string>();
    }
    if (b.contains("prompt_template")) {
      config.behavior.prompt_template = b["prompt_template"].get<std::string>();
    }
    if (b.contains("temperature")) config.behavior.temperature = b["temperature"].get<double>();
    if (b.contains("timeout_sec")) config.behavior.timeout_sec = b["timeout_sec"].get<double>();
    if (b.contains("retries")) config.behavior.retries = b["retries"].get<int>();
    if (b.contains("max_in_flight")) config.behavior.max_in_flight = b["max_in_flight"].get<int>();
  }
  if (doc.contains("out_dir")) config.out_dir = doc["out_dir"].get<std::string>();
  if (doc.contains("workers")) config.workers = doc["workers"].get<int>();
  if (doc.contains("opt_budget")) config.opt_budget = doc["opt_budget"].get<std::uint64_t>();
  return config;
}

Population resolve_population(const RunConfig& config) {
  if (config.generator && !config.population_path.empty()) {
    throw std::invalid_argument("config names both a generator and a population file");
  }
  Population pop = config.generator ? generate_population(*config.generator)
                                    : load_population(config.population_path);
  if (config.split_fraction) {
    pop = split_tasks(pop, *config.split_fraction, config.split_seed);
  }
  if (config.d_max_override) {
    pop = override_d_max(pop, *config.d_max_override);
  }
  if (pop.test_tasks().empty()) {
    throw std::invalid_argument(
        "population has no test tasks; add a split (e.g. \"split\": {\"fraction\": 0.5})");
  }
  return pop;
}

SelectionResult run_method(const Population& pop, const BehaviorModel& model,
                           const SelectorConfig& cfg, const std::string& method,
                           std::uint64_t opt_budget) {
  if (method == "single") return select_single(pop, model, cfg);
  if (method == "random") return select_random(pop, model, cfg);
  if (method == "kmedoids") return select_kmedoids(pop, model, cfg);
  if (method == "sample-greedy") return select_sample_greedy(pop, model, cfg);
  if (method == "reppop-demo") return select_reppop_demo(pop, model, cfg);
  if (method == "reppop-mapped-1") {
    return select_reppop_mapped(pop, model, cfg, ProxyStrategy::uniform);
  }
  if (method == "reppop-mapped-2") {
    return select_reppop_mapped(pop, model, cfg, ProxyStrategy::greedy);
  }
  if (method == "opt") {
    // Exhaustive search over the human-mapped proxy pool (the enumerable
    // stand-in for the full agent space).
    validate_config(cfg, pop);
    auto result = brute_force_optimum(
        pop, build_proxy_pool(pop, model, cfg, ProxyStrategy::uniform), cfg.m, opt_budget);
    return result;
  }
  throw std::invalid_argument("unknown method '" + method + "'");
}

namespace {

// Re-materializes the selected contexts on the test tasks and measures the
// gap there. Agents whose context is empty (pseudo-agents) keep their
// embedding only if it already matches the test dimension.
double test_gap(const Population& pop, const std::vector<AgentSpec>& agents,
                const BehaviorModel& model, std::uint64_t seed) {
  std::vector<EmbeddingVector> test_agents;
  test_agents.reserve(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    AgentSpec spec = agents[i];
    spec = materialize_agent(pop, std::move(spec), pop.test_tasks(), model,
                             rng::derive(seed, "test-rollout", i));
    test_agents.push_back(std::move(spec.embedding));
  }
  const auto humans = pop.test_embeddings();
  return representation_gap(humans, test_agents, pop.d_max());
}

CellResult run_cell(const Population& pop, const BehaviorModel& model, const RunConfig& config,
                    const std::string& method, int m, std::uint64_t seed) {
  CellResult cell;
  cell.method = method;
  cell.m = m;
  cell.seed = seed;
  const auto start = std::chrono::steady_clock::now();
  try {
    SelectorConfig cfg;
    cfg.m = m;
    cfg.k = config.k;
    cfg.psi = config.psi;
    cfg.alpha = config.alpha;
    cfg.pool_target = config.pool_target;
    cfg.seed = seed;

    const SelectionResult result = run_method(pop, model, cfg, method, config.opt_budget);

    const auto train_dim = pop.human(0).train_embedding.dim();
    const auto test_dim = pop.human(0).test_embedding.dim();
    cell.train_gap = result.final_gap;
    cell.train_error = normalize_error(cell.train_gap, pop.scheme(), train_dim);
    cell.train_f = pop.d_max() - cell.train_gap;
    cell.test_gap = test_gap(pop, result.agents, model, seed);
    cell.test_error = normalize_error(cell.test_gap, pop.scheme(), test_dim);
    cell.test_f = pop.d_max() - cell.test_gap;
    cell.ok = true;
  } catch (const std::exception& e) {
    cell.ok = false;
    cell.error_message = e.what();
  }
  cell.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return cell;
}

std::string format_double(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%.12g", v);
  return buffer;
}

std::string sanitize_message(std::string s) {
  for (char& c : s) {
    if (c == ',' ) c = ';';
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

std::vector<CellResult> execute_cells(const RunConfig& config, const Population& pop) {
  if (config.methods.empty()) throw std::invalid_argument("method list is empty");
  if (config.seeds.empty()) throw std::invalid_argument("seed list is empty");
  for (int m : config.m_values) {
    if (m < 1) throw std::invalid_argument("M values must be positive");
  }

  const auto model = make_behavior_model(config.behavior);

  struct Cell {
    std::string method;
    int m;
    std::uint64_t seed;
  };
  std::vector<Cell> todo;
  for (const auto& method : config.methods) {
    for (int m : config.m_values) {
      for (std::uint64_t seed : config.seeds) todo.push_back({method, m, seed});
    }
  }

  std::vector<CellResult> results(todo.size());
  const int workers = std::max(1, config.workers);
  if (workers == 1) {
    for (std::size_t i = 0; i < todo.size(); ++i) {
      results[i] = run_cell(pop, *model, config, todo[i].method, todo[i].m, todo[i].seed);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      threads.emplace_back([&] {
        while (true) {
          const std::size_t i = next.fetch_add(1);
          if (i >= todo.size()) break;
          results[i] = run_cell(pop, *model, config, todo[i].method, todo[i].m, todo[i].seed);
        }
      });
    }
    for (auto& t : threads) t.join();
  }

  std::sort(results.begin(), results.end(), [](const CellResult& a, const CellResult& b) {
    return std::tie(a.method, a.m, a.seed) < std::tie(b.method, b.m, b.seed);
  });
  return results;
}

std::string render_results_csv(const std::vector<CellResult>& cells, const RunConfig& config) {
  std::ostringstream out;
  out << "method,m,k,seed,split,gap,error,objective,status\n";
  for (const auto& cell : cells) {
    for (const std::string split : {"test", "train"}) {
      out << cell.method << "," << cell.m << "," << config.k << "," << cell.seed << "," << split
          << ",";
      if (cell.ok) {
        const bool test = split == "test";
        out << format_double(test ? cell.test_gap : cell.train_gap) << ","
            << format_double(test ? cell.test_error : cell.train_error) << ","
            << format_double(test ? cell.test_f : cell.train_f) << ",ok";
      } else {
        out << ",,,error: " << sanitize_message(cell.error_message);
      }
      out << "\n";
    }
  }
  return out.str();
}

json summarize_cells(const std::vector<CellResult>& cells) {
  struct Key {
    std::string method;
    int m;
    bool operator<(const Key& other) const {
      return std::tie(method, m) < std::tie(other.method, other.m);
    }
  };
  std::map<Key, std::vector<std::pair<double, double>>> grouped;  // (train, test) errors
  for (const auto& cell : cells) {
    if (!cell.ok) continue;
    grouped[{cell.method, cell.m}].push_back({cell.train_error, cell.test_error});
  }

  auto mean_stderr = [](const std::vector<double>& xs) {
    json j;
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var = xs.size() > 1 ? var / (n - 1.0) : 0.0;
    j["mean"] = mean;
    j["stderr"] = xs.size() > 1 ? std::sqrt(var / n) : 0.0;
    j["n"] = xs.size();
    return j;
  };

  json summary = json::array();
  for (const auto& [key, errors] : grouped) {
    std::vector<double> train, test;
    for (const auto& [tr, te] : errors) {
      train.push_back(tr);
      test.push_back(te);
    }
    json entry;
    entry["method"] = key.method;
    entry["m"] = key.m;
    entry["train_error"] = mean_stderr(train);
    entry["test_error"] = mean_stderr(test);
    summary.push_back(std::move(entry));
  }
  return summary;
}

json run_verification(const VerifyConfig& config) {
  json report;

  const auto submod = run_submodularity_sweep(config.submodularity_instances,
                                              config.submodularity_trials, config.seed);
  report["submodularity"] = {{"instances", submod.instances},
                             {"trials", submod.trials},
                             {"violations", submod.violations},
                             {"worst_margin", submod.worst_margin},
                             {"tolerance", 1e-9}};

  const auto greedy = run_greedy_bound_sweep(config.greedy_instances, config.seed);
  report["greedy_bound"] = {{"instances", greedy.instances},
                            {"failures", greedy.failures},
                            {"min_ratio", greedy.min_ratio},
                            {"threshold", 1.0 - 1.0 / std::exp(1.0)}};

  const auto mapped =
      run_mapped_bound_sweep(config.mapped_bound_instances, config.rho_values, config.seed);
  json reports = json::array();
  for (const auto& r : mapped.reports) {
    reports.push_back({{"gamma", r.gamma},
                       {"rho_emp", r.rho_emp},
                       {"f_opt_full", r.f_opt_full},
                       {"f_opt_human", r.f_opt_human},
                       {"f_method", r.f_method},
                       {"bound_value", r.bound_value},
                       {"satisfied", r.satisfied},
                       {"vacuous", r.vacuous},
                       {"pool", r.pool}});
  }
  report["mapped_bound"] = {{"instances", mapped.instances},
                            {"failures", mapped.failures},
                            {"vacuous", mapped.vacuous},
                            {"budget_refusals", mapped.refusals},
                            {"rho_values", config.rho_values},
                            {"reports", std::move(reports)}};
  return report;
}

namespace {

void write_file(const std::string& path, const std::string& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << body;
}

}  // namespace

int cmd_run(const RunConfig& config) {
  const Population pop = resolve_population(config);
  const auto cells = execute_cells(config, pop);

  std::filesystem::create_directories(config.out_dir);
  write_file(config.out_dir + "/results.csv", render_results_csv(cells, config));

  json summary = summarize_cells(cells);
  write_file(config.out_dir + "/summary.json", summary.dump(2) + "\n");

  json meta;
  meta["created_unix"] = static_cast<std::int64_t>(
      std::chrono::duration_cast<std::chrono::seconds>(
          std::chrono::system_clock::now().time_since_epoch())
          .count());
  meta["population"] = {{"n_humans", pop.n_humans()},
                        {"n_tasks", pop.n_tasks()},
                        {"scheme", to_string(pop.scheme())},
                        {"d_max", pop.d_max()},
                        {"train_tasks", pop.train_tasks().size()},
                        {"test_tasks", pop.test_tasks().size()}};
  json cell_meta = json::array();
  int failures = 0;
  for (const auto& cell : cells) {
    cell_meta.push_back({{"method", cell.method},
                         {"m", cell.m},
                         {"seed", cell.seed},
                         {"wall_time_sec", cell.wall_time_sec},
                         {"status", cell.ok ? "ok" : cell.error_message}});
    if (!cell.ok) ++failures;
  }
  meta["cells"] = std::move(cell_meta);
  meta["failures"] = failures;
  write_file(config.out_dir + "/run-meta.json", meta.dump(2) + "\n");

  return failures > 0 ? 2 : 0;
}

int cmd_verify(const VerifyConfig& config) {
  const json report = run_verification(config);
  std::filesystem::create_directories(config.out_dir);
  write_file(config.out_dir + "/bounds.json", report.dump(2) + "\n");

  const bool ok = report["submodularity"]["violations"].get<int>() == 0 &&
                  report["greedy_bound"]["failures"].get<int>() == 0 &&
                  report["mapped_bound"]["failures"].get<int>() == 0;
  std::cout << "submodularity violations: " << report["submodularity"]["violations"] << "\n"
            << "greedy bound failures:    " << report["greedy_bound"]["failures"]
            << " (min ratio " << report["greedy_bound"]["min_ratio"] << ")\n"
            << "mapped bound failures:    " << report["mapped_bound"]["failures"] << " ("
            << report["mapped_bound"]["vacuous"] << " vacuous)\n";
  return ok ? 0 : 2;
}

int cmd_generate(const GeneratorSpec& spec, const std::string& out_path) {
  const Population pop = generate_population(spec);
  const auto parent = std::filesystem::path(out_path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  save_population(pop, out_path);
  std::cout << "wrote " << out_path << " (" << pop.n_humans() << " humans, " << pop.n_tasks()
            << " tasks, " << to_string(pop.scheme()) << ")\n";
  return 0;
}

int cmd_describe(const std::string& path) {
  const Population pop = load_population(path);
  double min_d = std::numeric_limits<double>::infinity();
  double max_d = 0.0;
  double sum_d = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < pop.n_humans(); ++i) {
    for (std::size_t j = i + 1; j < pop.n_humans(); ++j) {
      const double d = distance(pop.human(i).train_embedding, pop.human(j).train_embedding);
      min_d = std::min(min_d, d);
      max_d = std::max(max_d, d);
      sum_d += d;
      ++pairs;
    }
  }
  std::cout << "humans:       " << pop.n_humans() << "\n"
            << "tasks:        " << pop.n_tasks() << " (train " << pop.train_tasks().size()
            << ", test " << pop.test_tasks().size() << ")\n"
            << "scheme:       " << to_string(pop.scheme()) << " (" << to_string(pop.metric())
            << ")\n"
            << "d_max:        " << pop.d_max() << "\n";
  if (pairs > 0) {
    std::cout << "train pair distances: min " << format_double(min_d) << ", mean "
              << format_double(sum_d / static_cast<double>(pairs)) << ", max "
              << format_double(max_d) << "\n";
  }
  return 0;
}

}  // namespace repsel
