// fedsim: deterministic simulator and analysis toolkit for federated
// averaging under unreliable uplinks.

#include <CLI11.hpp>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "fedsim/analysis.hpp"
#include "fedsim/config.hpp"
#include "fedsim/errors.hpp"
#include "fedsim/experiment.hpp"

namespace {

using fedsim::ExperimentConfig;
using fedsim::Json;

std::vector<double> parse_double_list(const std::string& spec) {
  std::vector<double> values;
  std::stringstream ss(spec);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    values.push_back(std::stod(item));
  }
  if (values.empty()) throw fedsim::ConfigError("empty list: " + spec);
  return values;
}

fedsim::GridAxis parse_grid_axis(const std::string& spec) {
  auto eq = spec.find('=');
  if (eq == std::string::npos)
    throw fedsim::ConfigError("grid spec must look like key=v1,v2,...: " + spec);
  fedsim::GridAxis axis;
  axis.key = spec.substr(0, eq);
  for (double v : parse_double_list(spec.substr(eq + 1)))
    axis.values.push_back(v);
  return axis;
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> out_path,
            std::optional<std::string> csv_path) {
  ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  cfg.validate();
  std::uint64_t used_seed = seed.value_or(cfg.seeds.front());
  fedsim::ExperimentResult result = fedsim::run_experiment(cfg, used_seed);

  std::ostringstream jsonl;
  fedsim::write_jsonl(cfg, used_seed, result, jsonl);
  std::string target =
      fedsim::resolve_output_path(out_path.value_or(cfg.output));
  if (target.empty()) {
    std::cout << jsonl.str();
  } else {
    fedsim::write_file_atomic(target, jsonl.str());
    std::cerr << "wrote " << result.rounds.size() + 1 << " records to "
              << target << "\n";
  }
  if (csv_path) {
    std::ostringstream csv;
    fedsim::write_csv(result, csv);
    fedsim::write_file_atomic(fedsim::resolve_output_path(*csv_path), csv.str());
  }
  return 0;
}

int cmd_sweep(const std::string& config_path,
              const std::vector<std::string>& grid_specs,
              std::optional<std::string> out_path) {
  ExperimentConfig base = ExperimentConfig::from_file(config_path);
  base.validate();
  std::vector<fedsim::GridAxis> grid;
  for (const std::string& spec : grid_specs)
    grid.push_back(parse_grid_axis(spec));
  std::vector<fedsim::SweepCell> cells = fedsim::run_sweep(base, grid);

  std::ostringstream jsonl;
  fedsim::write_sweep_jsonl(cells, jsonl);
  std::string target = fedsim::resolve_output_path(
      out_path.value_or(base.output));
  if (target.empty()) {
    std::cout << jsonl.str();
  } else {
    fedsim::write_file_atomic(target, jsonl.str());
    std::cerr << "wrote " << cells.size() << " cells to " << target << "\n";
  }
  return 0;
}

int cmd_bias_oracle(const std::string& p_spec, const std::string& u_spec) {
  std::vector<double> p = parse_double_list(p_spec);
  std::vector<double> u_scalar = parse_double_list(u_spec);
  if (p.size() != u_scalar.size())
    throw fedsim::ConfigError("--p and --u must have the same length");

  std::vector<fedsim::Vec> u(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    u[i] = fedsim::Vec::Constant(1, u_scalar[i]);
  }
  fedsim::Vec closed = fedsim::fedavg_bias_closedform(p, u);

  // Independent enumeration route (throws on disagreement).
  double none_active = 1.0;
  for (double pi : p) none_active *= 1.0 - pi;
  double enumerated = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    enumerated += u_scalar[i] *
                  fedsim::inclusion_weight_oracle(p, static_cast<int>(i));
  enumerated /= 1.0 - none_active;

  Json j;
  j["closed_form"] = closed(0);
  j["enumeration"] = enumerated;
  j["abs_diff"] = std::abs(closed(0) - enumerated);
  std::cout << j.dump(2) << "\n";
  if (std::abs(closed(0) - enumerated) > 1e-10)
    throw fedsim::InternalError("bias oracle cross-check failed");
  return 0;
}

int cmd_spectral(const std::string& p_spec) {
  std::vector<double> p = parse_double_list(p_spec);
  fedsim::SpectralReport report = fedsim::ergodicity_check(p);
  Json j;
  j["m"] = p.size();
  j["c"] = report.c;
  j["rho"] = report.rho;
  j["bound_general"] = report.bound_general;
  j["within_bound"] = report.within_bound;
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < report.m2.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < report.m2.cols(); ++c)
      row.push_back(report.m2(r, c));
    rows.push_back(row);
  }
  j["expected_w2"] = rows;
  std::cout << j.dump(2) << "\n";
  if (!report.within_bound)
    throw fedsim::InternalError("spectral bound violated");
  return 0;
}

int cmd_validate(const std::string& config_path) {
  ExperimentConfig cfg = ExperimentConfig::from_file(config_path);
  cfg.validate();
  // Echo the normalized config with every default made explicit.
  std::cout << cfg.serialize();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Federated averaging under unreliable uplinks: simulator and "
               "analysis oracles"};
  app.require_subcommand(1);

  std::string config_path, p_spec, u_spec;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_path, csv_path;
  std::vector<std::string> grid_specs;

  CLI::App* run = app.add_subcommand("run", "Run one experiment");
  run->add_option("config", config_path, "Config file (JSON)")->required();
  run->add_option("--seed", seed, "Root seed (default: first config seed)");
  run->add_option("--out", out_path, "JSONL output path (default: stdout)");
  run->add_option("--csv", csv_path, "Also write a CSV projection");

  CLI::App* sweep = app.add_subcommand("sweep", "Run a parameter grid");
  sweep->add_option("config", config_path, "Config file (JSON)")->required();
  sweep->add_option("--grid", grid_specs, "Axis spec key=v1,v2,... (repeatable)")
      ->required();
  sweep->add_option("--out", out_path, "JSONL output path (default: stdout)");

  CLI::App* bias = app.add_subcommand(
      "bias-oracle", "FedAvg limit point: closed form vs enumeration");
  bias->add_option("--p", p_spec, "Activation probabilities, comma separated")
      ->required();
  bias->add_option("--u", u_spec, "Scalar client optima, comma separated")
      ->required();

  CLI::App* spectral = app.add_subcommand(
      "spectral", "Expected gossip matrix, rho, and ergodicity bounds");
  spectral->add_option("--p", p_spec, "Activation probabilities")->required();

  CLI::App* validate =
      app.add_subcommand("validate", "Check a config and print it normalized");
  validate->add_option("config", config_path, "Config file (JSON)")->required();

  try {
    app.parse(argc, argv);
    if (run->parsed()) return cmd_run(config_path, seed, out_path, csv_path);
    if (sweep->parsed()) return cmd_sweep(config_path, grid_specs, out_path);
    if (bias->parsed()) return cmd_bias_oracle(p_spec, u_spec);
    if (spectral->parsed()) return cmd_spectral(p_spec);
    if (validate->parsed()) return cmd_validate(config_path);
    return 1;
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);  // prints usage / help text
    return code == 0 ? 0 : 1;
  } catch (const fedsim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const fedsim::InternalError& e) {
    std::cerr << "internal check failed: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
