#include "pipeline.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "sensorplace/errors.hpp"
#include "sensorplace/placement_io.hpp"
#include "sensorplace/random.hpp"
#include "sensorplace/snapshot_io.hpp"

namespace sensorplace::cli {
namespace {

using nlohmann::json;

std::vector<double> read_number_list(const json& j, const char* key) {
  // Either [a, b, c] or {"start": s, "step": h, "stop": e}.
  if (j.is_array()) return j.get<std::vector<double>>();
  if (j.is_object())
    return inclusive_range(j.at("start").get<double>(), j.at("step").get<double>(),
                           j.at("stop").get<double>());
  throw ParseError(std::string("config: ") + key + " must be a list or a range object");
}

const char* scaling_name(BasisScaling s) { return s == BasisScaling::unit ? "unit" : "sv-scaled"; }

BasisScaling parse_scaling(const std::string& s) {
  if (s == "unit") return BasisScaling::unit;
  if (s == "sv-scaled" || s == "sv_scaled") return BasisScaling::sv_scaled;
  throw ParseError("config: scaling must be 'unit' or 'sv-scaled', got '" + s + "'");
}

json to_json(const PipelineConfig& c) {
  json dataset;
  if (c.dataset_path) dataset["path"] = c.dataset_path->string();
  dataset["generator"] = {{"grid_min", c.generator.grid_min},
                          {"grid_max", c.generator.grid_max},
                          {"grid_step", c.generator.grid_step},
                          {"means", c.generator.means},
                          {"sigmas", c.generator.sigmas}};
  json pod = {{"energy", c.energy}, {"scaling", scaling_name(c.scaling)}};
  if (c.rank) pod["rank"] = *c.rank;
  json placement = {{"sensors", c.sensors}, {"oversample_node_budget", c.oversample_node_budget}};
  if (c.constraints_path) placement["constraints"] = c.constraints_path->string();
  placement["min_distance"] = c.min_distance ? json(*c.min_distance) : json(nullptr);
  return {
      {"dataset", dataset},
      {"preprocess", {{"center", c.center}, {"train_fraction", c.train_fraction}}},
      {"pod", pod},
      {"placement", placement},
      {"evaluate",
       {{"sensor_counts", c.sensor_counts},
        {"noise_levels", c.noise_levels},
        {"trials", c.trials},
        {"random_baseline", c.random_baseline}}},
      {"seed", c.seed},
      {"out", c.out_dir.string()},
  };
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw Error("failed writing " + path.string());
}

void ensure_out_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

ConstraintSpec resolve_constraints(const PipelineConfig& config, const SnapshotMatrix& data) {
  ConstraintSpec spec;
  if (config.constraints_path)
    spec = load_constraints(*config.constraints_path, data.coords, data.nodes());
  if (config.min_distance) spec.min_distance = *config.min_distance;
  if (spec.min_distance > 0.0 && !data.has_coords()) {
    // A distance rule is meaningless without coordinates; only an explicit
    // constraint file is allowed to demand one.
    if (config.constraints_path) spec.validate(data.nodes(), false);
    spec.min_distance = 0.0;
  }
  return spec;
}

std::string coord_text(const SnapshotMatrix& data, Index node) {
  if (!data.has_coords()) return "";
  std::ostringstream out;
  out << std::setprecision(6);
  for (Index d = 0; d < data.coords.cols(); ++d) out << (d ? ", " : "") << data.coords(node, d);
  return out.str();
}

}  // namespace

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig c;
  try {
    const auto doc = json::parse(text);
    if (!doc.is_object()) throw ParseError("config must be a JSON object");
    if (doc.contains("dataset")) {
      const auto& d = doc.at("dataset");
      if (d.contains("path")) c.dataset_path = d.at("path").get<std::string>();
      if (d.contains("generator")) {
        const auto& g = d.at("generator");
        c.generator.grid_min = g.value("grid_min", c.generator.grid_min);
        c.generator.grid_max = g.value("grid_max", c.generator.grid_max);
        c.generator.grid_step = g.value("grid_step", c.generator.grid_step);
        if (g.contains("means")) c.generator.means = read_number_list(g.at("means"), "means");
        if (g.contains("sigmas")) c.generator.sigmas = read_number_list(g.at("sigmas"), "sigmas");
      }
    }
    if (doc.contains("preprocess")) {
      const auto& p = doc.at("preprocess");
      c.center = p.value("center", c.center);
      c.train_fraction = p.value("train_fraction", c.train_fraction);
    }
    if (doc.contains("pod")) {
      const auto& p = doc.at("pod");
      if (p.contains("rank")) c.rank = p.at("rank").get<Index>();
      c.energy = p.value("energy", c.energy);
      if (p.contains("scaling")) c.scaling = parse_scaling(p.at("scaling").get<std::string>());
    }
    if (doc.contains("placement")) {
      const auto& p = doc.at("placement");
      if (p.contains("constraints")) c.constraints_path = p.at("constraints").get<std::string>();
      if (p.contains("min_distance")) {
        if (p.at("min_distance").is_null()) c.min_distance.reset();
        else c.min_distance = p.at("min_distance").get<double>();
      }
      c.sensors = p.value("sensors", c.sensors);
      c.oversample_node_budget = p.value("oversample_node_budget", c.oversample_node_budget);
    }
    if (doc.contains("evaluate")) {
      const auto& e = doc.at("evaluate");
      if (e.contains("sensor_counts")) c.sensor_counts = e.at("sensor_counts").get<std::vector<Index>>();
      if (e.contains("noise_levels")) c.noise_levels = read_number_list(e.at("noise_levels"), "noise_levels");
      c.trials = e.value("trials", c.trials);
      c.random_baseline = e.value("random_baseline", c.random_baseline);
    }
    c.seed = doc.value("seed", c.seed);
    if (doc.contains("out")) c.out_dir = doc.at("out").get<std::string>();
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
  if (c.trials < 1) throw ParseError("config: trials must be at least 1");
  if (c.sensors < 0) throw ParseError("config: sensors must be non-negative");
  for (auto p : c.sensor_counts)
    if (p < 1) throw ParseError("config: sensor counts must be at least 1");
  for (double level : c.noise_levels)
    if (!(level >= 0.0)) throw ParseError("config: noise levels must be non-negative");
  return c;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const PipelineConfig& config) { return to_json(config).dump(2); }

std::string config_hash(const PipelineConfig& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : to_json(config).dump()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

PreparedData prepare(const PipelineConfig& config) {
  PreparedData d;
  if (config.dataset_path) {
    if (!std::filesystem::exists(*config.dataset_path))
      throw ParseError("dataset " + config.dataset_path->string() + " does not exist");
    d.full = load_snapshots(*config.dataset_path, format_for_path(*config.dataset_path));
  } else {
    const auto& g = config.generator;
    d.full = generate_gaussian_dataset(g.grid_min, g.grid_max, g.grid_step, g.means, g.sigmas);
  }
  d.split = split(d.full, config.train_fraction, config.seed);
  d.train = d.full.select_cases(d.split.train_cases);
  d.test = d.full.select_cases(d.split.test_cases);

  Eigen::MatrixXd fit = d.train.values;
  if (config.center) {
    auto centered = center(d.train);
    d.train_mean = centered.mean;
    fit = std::move(centered.fluctuations.values);
  } else {
    d.train_mean = MeanField{Eigen::VectorXd::Zero(d.full.nodes())};
  }
  d.spectrum = compute_pod(fit);
  const TruncationCriterion criterion =
      config.rank ? TruncationCriterion{RankCriterion{*config.rank}}
                  : TruncationCriterion{EnergyCriterion{config.energy}};
  d.basis = truncate(d.spectrum, criterion, config.scaling, d.train_mean);
  return d;
}

std::filesystem::path cmd_generate(const PipelineConfig& config, std::ostream& log) {
  const auto& g = config.generator;
  const auto data = generate_gaussian_dataset(g.grid_min, g.grid_max, g.grid_step, g.means, g.sigmas);
  ensure_out_dir(config.out_dir);
  const auto path = config.out_dir / "dataset.bin";
  save_snapshots_binary(data, path);
  if (data.has_coords()) save_coords_csv(data, coords_sidecar_path(path));
  log << "wrote " << path.string() << " (" << data.nodes() << " nodes x " << data.snapshots()
      << " snapshots, " << data.n_cases << " cases)\n";
  return path;
}

Index cmd_pod(const PipelineConfig& config, std::ostream& log) {
  const auto d = prepare(config);
  ensure_out_dir(config.out_dir);
  const auto energy = cumulative_energy(d.spectrum);
  const double smax = d.spectrum.singular_values(0);

  std::ostringstream table;
  table << "mode,singular_value,normalized_singular_value,cumulative_energy\n";
  for (Index i = 0; i < energy.size(); ++i)
    table << (i + 1) << ',' << std::setprecision(17) << d.spectrum.singular_values(i) << ','
          << d.spectrum.singular_values(i) / smax << ',' << energy(i) << '\n';
  write_text(config.out_dir / "pod_spectrum.csv", table.str());

  SnapshotMatrix modes;
  modes.values = d.basis.modes;
  modes.n_cases = static_cast<std::size_t>(d.basis.rank());
  modes.steps_per_case = 1;
  modes.coords = d.full.coords;
  save_snapshots_binary(modes, config.out_dir / "pod_modes.bin");

  log << "train cases " << d.split.train_cases.size() << ", test cases "
      << d.split.test_cases.size() << "\n";
  log << "rank " << d.basis.rank() << " captures " << std::setprecision(6)
      << energy(d.basis.rank() - 1) * 100.0 << "% of the energy (" << scaling_name(config.scaling)
      << " modes)\n";
  return d.basis.rank();
}

PlaceResult cmd_place(const PipelineConfig& config, std::ostream& log) {
  const auto d = prepare(config);
  const auto constraints = resolve_constraints(config, d.full);
  const Index r = d.basis.rank();
  const Index p = config.sensors > 0 ? config.sensors : r;
  if (p < r)
    log << "warning: " << p << " sensors for " << r
        << " modes leaves the gappy reconstruction under-determined\n";

  PlacementOptions options;
  options.oversample_node_budget = config.oversample_node_budget;
  PlaceResult result;
  result.sensors = place_sensors(d.basis, p, constraints, d.full.coords, options);
  result.rank = r;
  result.volume = selection_volume(d.basis, result.sensors);

  ensure_out_dir(config.out_dir);
  save_sensor_set(config.out_dir / "sensors.json", result.sensors, d.full.coords, result.volume);

  const auto energy = cumulative_energy(d.spectrum);
  log << "cumulative energy\n  modes  energy\n";
  const Index shown = std::min<Index>(energy.size(), std::max<Index>(r, 10));
  for (Index i = 0; i < shown; ++i)
    log << "  " << std::setw(5) << (i + 1) << "  " << std::fixed << std::setprecision(6) << energy(i)
        << (i + 1 == r ? "  <- r" : "") << '\n';
  log.unsetf(std::ios::floatfield);

  log << "sensor ranking (" << p << " sensors, " << r << " modes, "
      << constraints.forbidden.size() << " forbidden nodes, min distance "
      << constraints.min_distance << ")\n  rank   node  coords\n";
  for (std::size_t i = 0; i < result.sensors.size(); ++i) {
    const Index node = result.sensors.indices[i];
    log << "  " << std::setw(4) << (i + 1) << "  " << std::setw(5) << node << "  "
        << coord_text(d.full, node) << '\n';
  }
  log << "selection volume " << std::setprecision(10) << result.volume << '\n';
  return result;
}

ReconstructionReport cmd_evaluate(const PipelineConfig& config, std::ostream& log) {
  const auto d = prepare(config);
  const auto constraints = resolve_constraints(config, d.full);
  const Index r = d.basis.rank();

  PlacementOptions options;
  options.oversample_node_budget = config.oversample_node_budget;

  std::vector<Strategy> strategies;
  json seeds = json::object();
  auto counts = config.sensor_counts;
  if (counts.empty()) counts = {r, 2 * r};
  for (auto p : counts) {
    strategies.push_back({"optimal_p" + std::to_string(p),
                          place_sensors(d.basis, p, constraints, d.full.coords, options)});
    if (config.random_baseline) {
      const auto seed = derive_seed(config.seed, {0x72616e64ULL, static_cast<std::uint64_t>(p)});
      strategies.push_back({"random_p" + std::to_string(p),
                            random_placement(d.full.nodes(), p, constraints, d.full.coords, seed)});
      seeds["random_p" + std::to_string(p)] = seed;
    }
  }

  const auto report =
      noise_sweep(d.basis, strategies, d.test.values, config.noise_levels, config.trials, config.seed);

  ensure_out_dir(config.out_dir);
  write_text(config.out_dir / "report.csv", format_report_csv(report));

  // Clean-measurement coefficients of the first well-posed optimal strategy.
  for (const auto& s : strategies) {
    if (s.label.rfind("optimal", 0) != 0 || static_cast<Index>(s.sensors.size()) < r) continue;
    try {
      const auto estimate = reconstruct(d.basis, s.sensors, measure(d.test.values, s.sensors), d.basis.mean);
      write_text(config.out_dir / "coefficients.csv", format_coefficients_csv(estimate.coefficients));
      break;
    } catch (const IllConditionedError&) {
    }
  }

  json manifest = to_json(config);
  manifest["config_hash"] = config_hash(config);
  manifest["master_seed"] = config.seed;
  manifest["strategy_seeds"] = seeds;
  manifest["split"] = {{"train_cases", d.split.train_cases}, {"test_cases", d.split.test_cases}};
  manifest["rank"] = r;
  manifest["projection_nmse"] = report.projection_nmse;
  json sets = json::object();
  for (const auto& s : strategies) sets[s.label] = s.sensors.indices;
  manifest["strategies"] = sets;
  json failures = json::array();
  for (const auto& row : report.rows)
    if (row.infeasible)
      failures.push_back({{"strategy", row.strategy}, {"noise_sigma", row.noise_sigma},
                          {"error", row.failure}});
  manifest["failures"] = failures;
  write_text(config.out_dir / "manifest.json", manifest.dump(2) + "\n");

  log << format_report_csv(report);
  log << "projection floor nmse " << report.projection_nmse << '\n';
  return report;
}

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ParseError*>(&e)) return kParseError;
  if (dynamic_cast<const InfeasibleError*>(&e)) return kInfeasible;
  if (dynamic_cast<const IllConditionedError*>(&e) || dynamic_cast<const UnderdeterminedError*>(&e))
    return kIllConditioned;
  if (dynamic_cast<const InvalidArgument*>(&e)) return kParseError;
  return kFailure;
}

}  // namespace sensorplace::cli
