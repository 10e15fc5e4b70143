#include <iostream>

#include "CLI11.hpp"
#include "geolift/scenario.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Geodesic lifting and causal-structure probes on single-chart manifolds"};
  app.require_subcommand(1);

  std::string config;
  std::optional<std::uint64_t> seed;
  bool trace = false, parallel = false;
  std::string out_dir;

  auto* run = app.add_subcommand("run", "Run a YAML scenario and write JSON reports");
  run->add_option("config", config, "Scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--seed", seed, "Override the scenario seed");
  run->add_flag("--trace", trace, "Keep full lift sample traces in reports");
  run->add_flag("--parallel", parallel, "Run tasks concurrently");
  run->add_option("--out", out_dir, "Report directory (default: the scenario's output key)");

  std::string report, kind;
  auto* plot = app.add_subcommand("plot", "Write CSV data from a task report");
  plot->add_option("report", report, "Task report (JSON)")->required()->check(CLI::ExistingFile);
  plot->add_option("--kind", kind, "geodesic, det, lift, homotopy or connection")
      ->required()
      ->check(CLI::IsMember({"geodesic", "det", "lift", "homotopy", "connection"}));
  plot->add_option("--out", out_dir, "Output directory (default: next to the report)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      geolift::RunOptions opts;
      opts.seed = seed;
      opts.trace = trace;
      opts.parallel = parallel;
      if (!out_dir.empty()) opts.out_dir = out_dir;
      const auto outcome = geolift::run_scenario(config, opts);
      for (const auto& t : outcome.tasks) std::cout << t.status << "  " << t.name << "  " << t.file << "\n";
      std::cout << "summary  " << outcome.summary_path << "\n";
      return outcome.exit_code;
    }
    std::cout << geolift::emit_plot_data(report, kind, out_dir) << "\n";
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "geolift: " << e.what() << "\n";
    return 2;
  }
}
