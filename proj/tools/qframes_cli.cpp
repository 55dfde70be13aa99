#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qframes/qframes.hpp"

namespace {

std::map<std::string, qframes::Rational> parse_sets(const std::vector<std::string>& sets) {
  std::map<std::string, qframes::Rational> out;
  for (const auto& s : sets) {
    qframes::ScenarioConfig scratch;
    scratch.set(s);
    for (const auto& [key, values] : scratch.parameters) out[key] = qframes::parse_rational(values.front());
  }
  return out;
}

void print_table(const std::vector<qframes::RunReport>& reports) {
  for (const auto& r : reports) {
    std::cout << r.experiment << " (seed " << r.seed << ", " << r.seconds << " s)\n";
    for (const auto& c : r.claims) {
      std::cout << "  [" << (c.passed ? "pass" : "FAIL") << "] " << c.name << ": measured " << c.measured
                << ", expected " << c.expected;
      if (c.tolerance > 0) std::cout << " (tol " << c.tolerance << ")";
      std::cout << "\n";
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frame-transformation checks: exact Weyl algebra, frame maps and wave-packet dynamics"};
  app.require_subcommand(0, 1);

  std::string show;
  std::vector<std::string> show_sets;
  app.add_option("--show-hamiltonian", show, "Print a named Hamiltonian and exit")
      ->check(CLI::IsMember(qframes::hamiltonian_names()));

  auto* run_cmd = app.add_subcommand("run", "Run experiments and write claims.csv and summary.json");
  std::string config_path;
  std::string experiment;
  std::vector<std::string> sets;
  std::string out_dir;
  std::uint64_t seed = 20240917;
  bool parallel = false;
  bool trajectories = false;
  run_cmd->add_option("--config", config_path, "JSON run file (one run or {\"runs\": [...]})")->check(CLI::ExistingFile);
  run_cmd->add_option("--experiment", experiment, "E1..E7 or all");
  run_cmd->add_option("--set", sets, "Parameter override key=value[,value...]");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Random seed for sampled checks");
  run_cmd->add_option("--out", out_dir, "Report directory (overrides QFRAMES_OUT_DIR)");
  run_cmd->add_flag("--parallel", parallel, "Run experiments concurrently");
  run_cmd->add_flag("--trajectories", trajectories, "Also write Gaussian trajectory CSVs");
  run_cmd->excludes(app.get_option("--show-hamiltonian"));

  auto* show_cmd = app.add_subcommand("show", "Print a named Hamiltonian");
  std::string show_name;
  show_cmd->add_option("name", show_name)->required()->check(CLI::IsMember(qframes::hamiltonian_names()));
  show_cmd->add_option("--set", show_sets, "Parameter override key=value");

  CLI11_PARSE(app, argc, argv);

  try {
    if (!show.empty() || show_cmd->parsed()) {
      const std::string name = show.empty() ? show_name : show;
      std::cout << qframes::to_string(qframes::named_hamiltonian(name, parse_sets(show_sets))) << "\n";
      return 0;
    }
    if (!run_cmd->parsed()) {
      std::cout << app.help();
      return 0;
    }

    std::vector<qframes::ScenarioConfig> configs;
    if (!config_path.empty()) configs = qframes::load_configs(config_path);
    if (!experiment.empty()) {
      if (experiment == "all") {
        for (auto& c : qframes::default_configs(seed)) configs.push_back(std::move(c));
      } else {
        qframes::ScenarioConfig c;
        c.experiment = experiment;
        c.seed = seed;
        configs.push_back(std::move(c));
      }
    }
    if (configs.empty()) throw qframes::ConfigError("nothing to run: pass --config or --experiment");
    for (auto& c : configs) {
      for (const auto& s : sets) c.set(s);
      if (*seed_opt) c.seed = seed;
      c.trajectories = c.trajectories || trajectories;
      c.validate();
    }

    const std::string dir = qframes::resolve_output_dir(out_dir, configs.front().output_dir);
    const auto reports = qframes::run_all(configs, parallel, dir + "/trajectories");
    qframes::write_reports(reports, dir);
    print_table(reports);
    bool ok = true;
    for (const auto& r : reports) ok = ok && r.passed();
    std::cout << (ok ? "all claims passed" : "some claims FAILED") << "; reports in " << dir << "\n";
    return ok ? 0 : 1;
  } catch (const qframes::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
