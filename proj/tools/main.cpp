#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "pipeline.hpp"
#include "sensorplace/errors.hpp"

namespace cli = sensorplace::cli;

int main(int argc, char** argv) {
  CLI::App app{"Sparse sensor placement by POD and pivoted QR, with gappy reconstruction"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  app.add_option("--config", config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "Master seed (split, random baselines, noise)");
  app.add_option("--out", out_dir, "Output directory");

  std::optional<sensorplace::Index> rank;
  std::optional<double> energy;
  std::optional<std::string> scaling;
  std::optional<std::string> dataset;
  auto add_pod_flags = [&](CLI::App* sub) {
    sub->add_option("--dataset", dataset, "Snapshot file (.csv or packed binary)");
    sub->add_option("--rank", rank, "Truncation rank");
    sub->add_option("--energy", energy, "Cumulative energy target in (0, 1]");
    sub->add_option("--scaling", scaling, "Mode scaling")->check(CLI::IsMember({"unit", "sv-scaled"}));
  };

  std::optional<sensorplace::Index> sensors;
  std::optional<std::string> constraints;
  std::optional<double> min_distance;
  auto add_place_flags = [&](CLI::App* sub) {
    sub->add_option("--sensors", sensors, "Sensor count (default: one per mode)");
    sub->add_option("--constraints", constraints, "Constraint file")->check(CLI::ExistingFile);
    sub->add_option("--min-distance", min_distance, "Minimum sensor spacing");
  };

  auto* generate = app.add_subcommand("generate", "Write the parameterized Gaussian dataset");
  auto* pod = app.add_subcommand("pod", "POD spectrum and truncated basis of the training set");
  add_pod_flags(pod);
  auto* place = app.add_subcommand("place", "Rank sensor locations by pivoted QR");
  add_pod_flags(place);
  add_place_flags(place);
  auto* evaluate = app.add_subcommand("evaluate", "Noise sweep of optimal vs random placements");
  add_pod_flags(evaluate);
  add_place_flags(evaluate);
  std::optional<std::vector<double>> levels;
  std::optional<std::vector<sensorplace::Index>> counts;
  std::optional<std::size_t> trials;
  evaluate->add_option("--levels", levels, "Noise standard deviations")->delimiter(',');
  evaluate->add_option("--sensor-counts", counts, "Sensor counts to compare")->delimiter(',');
  evaluate->add_option("--trials", trials, "Noise draws per level");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? cli::kOk : cli::kParseError;
  }

  try {
    cli::PipelineConfig config = config_path.empty() ? cli::PipelineConfig{} : cli::load_config(config_path);
    if (seed) config.seed = *seed;
    if (out_dir) config.out_dir = *out_dir;
    if (dataset) config.dataset_path = *dataset;
    if (rank) config.rank = *rank;
    if (energy) {
      config.energy = *energy;
      config.rank.reset();
    }
    if (scaling) config.scaling = *scaling == "unit" ? sensorplace::BasisScaling::unit
                                                    : sensorplace::BasisScaling::sv_scaled;
    if (sensors) config.sensors = *sensors;
    if (constraints) config.constraints_path = *constraints;
    if (min_distance) config.min_distance = *min_distance;
    if (levels) config.noise_levels = *levels;
    if (counts) config.sensor_counts = *counts;
    if (trials) config.trials = *trials;

    if (generate->parsed()) {
      cli::cmd_generate(config, std::cout);
    } else if (pod->parsed()) {
      cli::cmd_pod(config, std::cout);
    } else if (place->parsed()) {
      cli::cmd_place(config, std::cout);
    } else if (evaluate->parsed()) {
      const auto report = cli::cmd_evaluate(config, std::cout);
      for (const auto& row : report.rows) {
        if (row.infeasible) {
          std::cerr << "error: " << row.strategy << " at noise " << row.noise_sigma
                    << " failed every trial: " << row.failure << '\n';
          return cli::kInfeasible;
        }
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_code_for(e);
  }
  return cli::kOk;
}
