#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedsim/algorithms.hpp"
#include "fedsim/link_models.hpp"

namespace fedsim {

using Json = nlohmann::json;

/// Full description of one experiment. Serialized as a flat JSON object;
/// parse(serialize(cfg)) is the identity and serialize() emits every field
/// explicitly (defaults included), so normalized configs are diffable.
struct ExperimentConfig {
  int clients = 2;
  int dim = 1;
  int rounds = 100;
  int local_steps = 1;

  AlgorithmKind algorithm = AlgorithmKind::FedPbc;

  LinkScheme link_scheme = LinkScheme::BernoulliStatic;
  double link_gamma = 0.0;
  double link_period = 40.0;
  int link_cycle_length = 100;
  double link_delta = 0.0;

  // Base probabilities: exactly one source must be set.
  std::vector<double> link_probs;          // explicit per-client values
  std::vector<std::pair<int, double>> link_prob_groups;  // (count, p) blocks
  bool link_construct_probs = false;       // Dirichlet/lognormal pipeline
  int prob_classes = 10;
  double prob_alpha = 0.1;
  double prob_mu0 = 0.0;
  double prob_sigma0 = 10.0;

  std::string objective = "quadratic";     // or "least_squares"
  std::vector<std::vector<double>> optima; // explicit u_i (quadratic only)
  double optima_mean_scale = 0.001;        // u_i ~ N((i+1)*scale*1, std^2 I)
  double optima_std = 0.1;
  int ls_rows = 0;                         // least-squares rows per client (0 -> dim)

  LrSchedule::Kind lr_schedule = LrSchedule::Kind::Constant;
  double eta0 = 0.1;
  double sigma = 0.0;

  std::vector<std::uint64_t> seeds = {0};
  std::string output;

  /// Throws ConfigError with a descriptive message on any invalid field.
  void validate() const;

  /// Resolved per-client base probabilities (draws from rng only when the
  /// construction pipeline is configured).
  std::vector<double> resolve_base_probs(std::uint64_t seed) const;

  LinkModelParams link_params() const;
  AlgorithmConfig algorithm_config() const;

  static ExperimentConfig from_json(const Json& j);
  static ExperimentConfig from_file(const std::string& path);
  Json to_json() const;

  /// Canonical (sorted-key, fully explicit) textual form.
  std::string serialize() const;
};

AlgorithmKind algorithm_kind_from_string(const std::string& name);
std::string to_string(AlgorithmKind kind);
LinkScheme link_scheme_from_string(const std::string& name);
std::string to_string(LinkScheme scheme);

}  // namespace fedsim
