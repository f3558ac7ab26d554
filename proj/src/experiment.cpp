#include "fedsim/experiment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <memory>
#include <nlohmann/json.hpp>
#include <ostream>
#include <sstream>

#include "fedsim/analysis.hpp"
#include "fedsim/errors.hpp"

namespace fedsim {

std::unique_ptr<Objective> build_objective(const ExperimentConfig& cfg,
                                           std::uint64_t seed) {
  if (cfg.objective == "least_squares") {
    RngStream rng = derive_stream(seed, "objective", 0, 0);
    int rows = cfg.ls_rows > 0 ? cfg.ls_rows : cfg.dim;
    return std::make_unique<LeastSquaresObjective>(
        LeastSquaresObjective::random(cfg.clients, cfg.dim, rows, rng));
  }
  std::vector<Vec> optima(cfg.clients);
  if (!cfg.optima.empty()) {
    for (int i = 0; i < cfg.clients; ++i)
      optima[i] = Eigen::Map<const Vec>(cfg.optima[i].data(), cfg.dim);
  } else {
    for (int i = 0; i < cfg.clients; ++i) {
      RngStream rng = derive_stream(seed, "optima", i, 0);
      Vec u(cfg.dim);
      double mean = (i + 1) * cfg.optima_mean_scale;
      for (int k = 0; k < cfg.dim; ++k)
        u(k) = mean + cfg.optima_std * rng.normal();
      optima[i] = std::move(u);
    }
  }
  return std::make_unique<QuadraticObjective>(std::move(optima));
}

namespace {

Vec mean_model(const std::vector<Vec>& models) {
  Vec mean = Vec::Zero(models[0].size());
  for (const Vec& x : models) mean += x;
  return mean / static_cast<double>(models.size());
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg,
                                std::uint64_t seed) {
  cfg.validate();

  auto objective = build_objective(cfg, seed);
  LinkEnsemble links(cfg.link_params(), cfg.resolve_base_probs(seed), seed);
  AlgorithmConfig alg = cfg.algorithm_config();
  SimState state = make_initial_state(alg, *objective, Vec::Zero(cfg.dim));

  ExperimentResult result;
  result.rounds.reserve(cfg.rounds);
  result.summary.initial_dist = (state.server_model - objective->minimizer()).norm();

  double staleness_sum = 0.0;
  long staleness_count = 0;
  long active_total = 0;
  std::vector<double> probs_at_t;
  const bool known_p = cfg.algorithm == AlgorithmKind::FedAvgKnownP;

  for (int t = 0; t < cfg.rounds; ++t) {
    for (int i = 0; i < cfg.clients; ++i) {
      if (state.last_active[i] >= 0) {
        staleness_sum += t - state.last_active[i];
        ++staleness_count;
      }
    }

    ActiveSet active = links.sample(t);
    if (known_p) {
      probs_at_t.resize(cfg.clients);
      for (int i = 0; i < cfg.clients; ++i) probs_at_t[i] = links.prob_at(i, t);
    }
    run_round(state, active, alg, *objective, probs_at_t, seed);

    Vec xbar = mean_model(state.client_models);
    GlobalMetrics gm = global_metrics(*objective, xbar);
    RoundMetrics rm;
    rm.t = t;
    rm.dist = (state.server_model - objective->minimizer()).norm();
    rm.grad_norm = gm.grad_norm;
    rm.value = gm.value;
    rm.consensus = consensus_error(state.client_models);
    rm.active_count = active.size();
    rm.mean_staleness =
        staleness_count > 0 ? staleness_sum / staleness_count : 0.0;
    if (!std::isfinite(rm.dist) || !std::isfinite(rm.grad_norm) ||
        !std::isfinite(rm.value) || !std::isfinite(rm.consensus))
      throw InternalError("non-finite metric at round " + std::to_string(t));
    active_total += active.size();
    result.rounds.push_back(rm);
  }

  RunSummary& s = result.summary;
  s.rounds = cfg.rounds;
  if (result.rounds.empty()) {
    s.final_dist = s.initial_dist;
    s.last100_mean_dist = s.initial_dist;
    s.final_grad_norm =
        objective->global_grad(state.server_model).norm();
  } else {
    s.final_dist = result.rounds.back().dist;
    s.final_grad_norm = result.rounds.back().grad_norm;
    int window = std::min<int>(100, result.rounds.size());
    double acc = 0.0;
    for (int t = cfg.rounds - window; t < cfg.rounds; ++t)
      acc += result.rounds[t].dist;
    s.last100_mean_dist = acc / window;
    s.mean_active = static_cast<double>(active_total) / cfg.rounds;
  }
  return result;
}

void write_jsonl(const ExperimentConfig& cfg, std::uint64_t seed,
                 const ExperimentResult& result, std::ostream& out) {
  for (const RoundMetrics& rm : result.rounds) {
    Json j;
    j["type"] = "round";
    j["t"] = rm.t;
    j["dist"] = rm.dist;
    j["grad_norm"] = rm.grad_norm;
    j["value"] = rm.value;
    j["consensus"] = rm.consensus;
    j["active"] = rm.active_count;
    j["mean_staleness"] = rm.mean_staleness;
    out << j.dump() << "\n";
  }
  Json j;
  j["type"] = "summary";
  j["algorithm"] = to_string(cfg.algorithm);
  j["seed"] = seed;
  j["rounds"] = result.summary.rounds;
  j["initial_dist"] = result.summary.initial_dist;
  j["final_dist"] = result.summary.final_dist;
  j["last100_mean_dist"] = result.summary.last100_mean_dist;
  j["final_grad_norm"] = result.summary.final_grad_norm;
  j["mean_active"] = result.summary.mean_active;
  out << j.dump() << "\n";
}

void write_csv(const ExperimentResult& result, std::ostream& out) {
  out << "t,dist,grad_norm,value,consensus,active,mean_staleness\n";
  for (const RoundMetrics& rm : result.rounds) {
    out << rm.t << ',' << rm.dist << ',' << rm.grad_norm << ',' << rm.value
        << ',' << rm.consensus << ',' << rm.active_count << ','
        << rm.mean_staleness << "\n";
  }
}

void write_file_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write output file: " + tmp);
    out << content;
  }
  std::filesystem::rename(tmp, path);
}

std::string resolve_output_path(const std::string& path) {
  const char* base = std::getenv("FEDSIM_OUT_DIR");
  if (base == nullptr || path.empty()) return path;
  std::filesystem::path p(path);
  if (p.is_absolute()) return path;
  return (std::filesystem::path(base) / p).string();
}

namespace {

struct Moments {
  double mean = 0.0, stdev = 0.0;
};

Moments moments(const std::vector<double>& xs) {
  Moments m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= xs.size();
  double var = 0.0;
  for (double x : xs) var += (x - m.mean) * (x - m.mean);
  m.stdev = std::sqrt(var / xs.size());
  return m;
}

}  // namespace

std::vector<SweepCell> run_sweep(const ExperimentConfig& base,
                                 const std::vector<GridAxis>& grid) {
  for (const GridAxis& axis : grid)
    if (axis.values.empty())
      throw ConfigError("sweep axis '" + axis.key + "' has no values");

  std::size_t total = 1;
  for (const GridAxis& axis : grid) total *= axis.values.size();

  Json base_json = base.to_json();
  std::vector<Json> cell_overrides(total);
  for (std::size_t cell = 0; cell < total; ++cell) {
    Json overrides = Json::object();
    std::size_t rest = cell;
    for (auto axis = grid.rbegin(); axis != grid.rend(); ++axis) {
      overrides[axis->key] = axis->values[rest % axis->values.size()];
      rest /= axis->values.size();
    }
    cell_overrides[cell] = std::move(overrides);
  }

  auto run_cell = [&base_json](const Json& overrides) {
    Json merged = base_json;
    for (auto it = overrides.begin(); it != overrides.end(); ++it)
      merged[it.key()] = it.value();
    ExperimentConfig cfg = ExperimentConfig::from_json(merged);
    cfg.validate();

    SweepCell cell;
    cell.overrides = overrides;
    cell.seeds = cfg.seeds;
    std::vector<double> finals, last100s, grads;
    for (std::uint64_t seed : cfg.seeds) {
      ExperimentResult r = run_experiment(cfg, seed);
      finals.push_back(r.summary.final_dist);
      last100s.push_back(r.summary.last100_mean_dist);
      grads.push_back(r.summary.final_grad_norm);
    }
    Moments f = moments(finals), l = moments(last100s), g = moments(grads);
    cell.final_dist_mean = f.mean;
    cell.final_dist_std = f.stdev;
    cell.last100_mean = l.mean;
    cell.last100_std = l.stdev;
    cell.final_grad_norm_mean = g.mean;
    cell.final_grad_norm_std = g.stdev;
    return cell;
  };

  std::vector<std::future<SweepCell>> futures;
  futures.reserve(total);
  for (std::size_t cell = 0; cell < total; ++cell)
    futures.push_back(std::async(std::launch::async, run_cell,
                                 std::cref(cell_overrides[cell])));
  std::vector<SweepCell> cells;
  cells.reserve(total);
  for (auto& f : futures) cells.push_back(f.get());
  return cells;
}

void write_sweep_jsonl(const std::vector<SweepCell>& cells, std::ostream& out) {
  for (const SweepCell& cell : cells) {
    Json j;
    j["type"] = "sweep_cell";
    j["overrides"] = cell.overrides;
    j["seeds"] = cell.seeds;
    j["final_dist_mean"] = cell.final_dist_mean;
    j["final_dist_std"] = cell.final_dist_std;
    j["last100_mean_dist_mean"] = cell.last100_mean;
    j["last100_mean_dist_std"] = cell.last100_std;
    j["final_grad_norm_mean"] = cell.final_grad_norm_mean;
    j["final_grad_norm_std"] = cell.final_grad_norm_std;
    out << j.dump() << "\n";
  }
}

}  // namespace fedsim
