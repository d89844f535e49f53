// Command-line runner: population generation, experiment sweeps and bound
// verification, with machine-readable CSV/JSON outputs.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "repsel/experiment.hpp"
#include "repsel/io.hpp"

namespace {

repsel::RunConfig load_run_config(const std::string& config_path) {
  if (config_path.empty()) return {};
  std::ifstream in(config_path);
  if (!in) throw std::invalid_argument("cannot open config '" + config_path + "'");
  nlohmann::json doc;
  in >> doc;
  return repsel::run_config_from_json(doc);
}

std::vector<std::string> split_list(const std::string& csv) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(csv);
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "1,5,10" or ranges "1..20"
std::vector<int> parse_m_values(const std::string& text) {
  std::vector<int> out;
  for (const auto& item : split_list(text)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(std::stoi(item));
    } else {
      const int lo = std::stoi(item.substr(0, dots));
      const int hi = std::stoi(item.substr(dots + 2));
      for (int m = lo; m <= hi; ++m) out.push_back(m);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"representative agent-set selection over human populations"};
  app.require_subcommand(1);

  // --- run ---
  auto* run = app.add_subcommand("run", "select agent sets and report representation errors");
  std::string run_config_path, run_out, run_methods, run_m_values, run_seeds, run_behavior;
  std::string run_pop_path, run_endpoint_url;
  double run_psi = -1.0, run_rho = -1.0, run_d_max = -1.0, run_split = -1.0;
  int run_k = -1, run_alpha = -1, run_workers = -1;
  run->add_option("--config", run_config_path, "JSON config file");
  run->add_option("--out", run_out, "output directory");
  run->add_option("--population", run_pop_path, "population file (csv or json)");
  run->add_option("--methods", run_methods,
                  "comma list: single,random,kmedoids,sample-greedy,reppop-demo,"
                  "reppop-mapped-1,reppop-mapped-2,opt");
  run->add_option("--m-values", run_m_values, "agent-set sizes, e.g. 1,5,10 or 1..20");
  run->add_option("--k", run_k, "context size K");
  run->add_option("--seeds", run_seeds, "comma list of seeds");
  run->add_option("--psi", run_psi, "sample-greedy pool fraction");
  run->add_option("--alpha", run_alpha, "demo candidates per round (reppop-demo)");
  run->add_option("--behavior", run_behavior, "behavior model: proxy|imitate|endpoint");
  run->add_option("--rho-max", run_rho, "proxy perturbation bound");
  run->add_option("--endpoint-url", run_endpoint_url, "endpoint base URL");
  run->add_option("--d-max", run_d_max, "override the population d_max");
  run->add_option("--split", run_split, "train fraction for file populations");
  run->add_option("--workers", run_workers, "parallel experiment cells");

  // --- verify ---
  auto* verify = app.add_subcommand("verify", "submodularity, greedy and mapped-bound checks");
  std::string verify_out = "out";
  std::uint64_t verify_seed = 7;
  int verify_submod = 100, verify_greedy = 200, verify_mapped = 50;
  verify->add_option("--out", verify_out, "output directory");
  verify->add_option("--seed", verify_seed, "sweep seed");
  verify->add_option("--submodularity-instances", verify_submod, "instances for the triple check");
  verify->add_option("--greedy-instances", verify_greedy, "instances for the greedy/opt ratio");
  verify->add_option("--mapped-bound-instances", verify_mapped, "instances for the mapped bound");

  // --- generate ---
  auto* generate = app.add_subcommand("generate", "write a synthetic population file");
  std::string gen_out = "population.json", gen_scheme = "binary";
  int gen_humans = 30, gen_tasks = 40, gen_clusters = 3;
  double gen_spread = 0.05, gen_train_fraction = 0.5;
  std::uint64_t gen_seed = 0;
  generate->add_option("-o,--out", gen_out, "output path");
  generate->add_option("--scheme", gen_scheme, "binary|ordinal|continuous");
  generate->add_option("--humans", gen_humans, "population size");
  generate->add_option("--tasks", gen_tasks, "task count");
  generate->add_option("--clusters", gen_clusters, "behavioral clusters");
  generate->add_option("--spread", gen_spread, "within-cluster spread");
  generate->add_option("--train-fraction", gen_train_fraction, "train split fraction");
  generate->add_option("--seed", gen_seed, "generator seed");

  // --- describe ---
  auto* describe = app.add_subcommand("describe", "summarize a population file");
  std::string describe_path;
  describe->add_option("path", describe_path, "population file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      repsel::RunConfig config = load_run_config(run_config_path);
      if (!run_out.empty()) config.out_dir = run_out;
      if (!run_pop_path.empty()) {
        config.population_path = run_pop_path;
        config.generator.reset();
      }
      if (!run_methods.empty()) config.methods = split_list(run_methods);
      if (!run_m_values.empty()) config.m_values = parse_m_values(run_m_values);
      if (run_k >= 0) config.k = run_k;
      if (!run_seeds.empty()) {
        config.seeds.clear();
        for (const auto& s : split_list(run_seeds)) config.seeds.push_back(std::stoull(s));
      }
      if (run_psi >= 0.0) config.psi = run_psi;
      if (run_alpha >= 0) config.alpha = run_alpha;
      if (!run_behavior.empty()) config.behavior.kind = run_behavior;
      if (run_rho >= 0.0) config.behavior.rho_max = run_rho;
      if (!run_endpoint_url.empty()) config.behavior.endpoint_url = run_endpoint_url;
      if (run_d_max >= 0.0) config.d_max_override = run_d_max;
      if (run_split >= 0.0) config.split_fraction = run_split;
      if (run_workers >= 1) config.workers = run_workers;
      if (!config.generator && config.population_path.empty()) {
        std::cerr << "error: no population source (use --config or --population)\n";
        return 1;
      }
      return repsel::cmd_run(config);
    }
    if (verify->parsed()) {
      repsel::VerifyConfig config;
      config.out_dir = verify_out;
      config.seed = verify_seed;
      config.submodularity_instances = verify_submod;
      config.greedy_instances = verify_greedy;
      config.mapped_bound_instances = verify_mapped;
      return repsel::cmd_verify(config);
    }
    if (generate->parsed()) {
      repsel::GeneratorSpec spec;
      spec.scheme = repsel::scheme_from_string(gen_scheme);
      spec.n_humans = gen_humans;
      spec.n_tasks = gen_tasks;
      spec.n_clusters = gen_clusters;
      spec.cluster_spread = gen_spread;
      spec.train_fraction = gen_train_fraction;
      spec.seed = gen_seed;
      return repsel::cmd_generate(spec, gen_out);
    }
    if (describe->parsed()) {
      return repsel::cmd_describe(describe_path);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
