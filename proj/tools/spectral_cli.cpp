// spectral: run spectral-risk learning experiments, summarize trajectories,
// and convert libsvm data into the delimited input format.

#include <chrono>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "spectral/data.hpp"
#include "spectral/experiment.hpp"

namespace {

namespace ex = spectral::experiment;

struct FlagSpec {
  const char* key;
  const char* help;
};

// Every value flag maps onto Config::set under the same key.
constexpr FlagSpec kRunFlags[] = {
    {"data", "Delimited input file (header row required)"},
    {"schema", "Schema file: 'column = numeric|categorical|label|ignore' per line"},
    {"delimiter", "Field delimiter (one character, or 'tab')"},
    {"synthetic", "Synthetic task instead of --data: two-gaussian"},
    {"synthetic-n", "Synthetic sample size"},
    {"synthetic-p", "Synthetic feature count"},
    {"separation", "Distance between the two Gaussian class means"},
    {"methods", "Comma list of default,fast,off"},
    {"spectrum", "exp | cvar | uniform"},
    {"spec-c", "Exponential spectrum parameter c"},
    {"spec-beta", "CVaR level beta"},
    {"epochs", "Passes over the training set"},
    {"trials", "Independent trials"},
    {"seed", "Base seed (u64)"},
    {"test-fraction", "Fraction of shuffled data held out for testing"},
    {"radius", "Radius of the feasible L2 ball"},
    {"gamma", "Scale of the derivative-free step size 2 gamma / (d sqrt(n))"},
    {"smoothing-delta", "Perturbation radius of the derivative-free estimator"},
    {"ancillary", "Ancillary sample size M, or 'auto' for ceil(sqrt(n))"},
    {"step-size", "Fixed step size, 'auto' for per-method defaults, or 'theory'"},
    {"theory-lambda-risk", "Risk Lipschitz constant used by --step-size theory"},
    {"theory-s1", "s1 used by --step-size theory"},
    {"theory-s2", "s2 used by --step-size theory"},
    {"delta", "Confidence parameter for --boost"},
    {"jobs", "Trials run in parallel"},
    {"out", "Output directory"},
};

int run_command(const std::string& config_path, const std::map<std::string, std::string>& flags,
                bool boost) {
  ex::Config cfg;
  if (!config_path.empty())
    for (const auto& [k, v] : ex::Config::read_file(config_path)) cfg.set(k, v);
  for (const auto& [k, v] : flags) cfg.set(k, v);
  if (boost) cfg.boost = true;

  const auto start = std::chrono::steady_clock::now();
  const auto result = ex::run_experiment(cfg);
  ex::write_outputs(cfg, result);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::cerr << "wrote " << result.records.size() << " trajectory rows to " << cfg.out << " in " << secs
            << " s\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral-risk learning with derivative-free and fast stochastic mirror descent"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run trials and write trajectories.csv, summary.csv, runlog.txt");
  std::string config_path;
  run->add_option("--config", config_path, "Flat key = value config file; flags override it")
      ->check(CLI::ExistingFile);
  std::map<std::string, std::string> values;
  std::vector<std::pair<std::string, CLI::Option*>> options;
  for (const auto& f : kRunFlags) {
    auto* opt = run->add_option(std::string("--") + f.key, values[f.key], f.help);
    options.emplace_back(f.key, opt);
  }
  bool boost = false;
  run->add_flag("--boost", boost, "Also run confidence boosting over the derivative-free method");

  auto* summarize = app.add_subcommand("summarize", "Mean and std over trials of one or more trajectories.csv");
  std::vector<std::string> inputs;
  std::string summary_out;
  summarize->add_option("inputs", inputs, "trajectories.csv files")->required()->check(CLI::ExistingFile);
  summarize->add_option("-o,--out", summary_out, "Write here instead of stdout");

  auto* convert = app.add_subcommand("convert", "Convert libsvm-format data into delimited text + schema");
  std::string libsvm_in, csv_out, schema_out;
  convert->add_option("input", libsvm_in, "libsvm file")->required()->check(CLI::ExistingFile);
  convert->add_option("--csv", csv_out, "Output delimited file")->required();
  convert->add_option("--schema", schema_out, "Output schema file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      std::map<std::string, std::string> given;
      for (const auto& [key, opt] : options)
        if (opt->count() > 0) given[key] = values[key];
      return run_command(config_path, given, boost);
    }
    if (summarize->parsed()) {
      std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
      const auto rows = ex::summarize_files(paths);
      if (summary_out.empty()) {
        ex::write_summary(std::cout, rows);
      } else {
        std::ofstream out(summary_out);
        if (!out) throw std::runtime_error("cannot write " + summary_out);
        ex::write_summary(out, rows);
      }
      return 0;
    }
    if (convert->parsed()) {
      spectral::convert_libsvm(libsvm_in, csv_out, schema_out);
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
