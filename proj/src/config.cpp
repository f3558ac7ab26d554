#include "fedsim/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "fedsim/errors.hpp"

namespace fedsim {

AlgorithmKind algorithm_kind_from_string(const std::string& name) {
  if (name == "fedpbc") return AlgorithmKind::FedPbc;
  if (name == "fedavg") return AlgorithmKind::FedAvg;
  if (name == "fedavg_all") return AlgorithmKind::FedAvgAll;
  if (name == "fedavg_known_p") return AlgorithmKind::FedAvgKnownP;
  if (name == "mifa") return AlgorithmKind::Mifa;
  throw ConfigError("unknown algorithm: " + name);
}

std::string to_string(AlgorithmKind kind) {
  switch (kind) {
    case AlgorithmKind::FedPbc: return "fedpbc";
    case AlgorithmKind::FedAvg: return "fedavg";
    case AlgorithmKind::FedAvgAll: return "fedavg_all";
    case AlgorithmKind::FedAvgKnownP: return "fedavg_known_p";
    case AlgorithmKind::Mifa: return "mifa";
  }
  throw InternalError("unreachable algorithm kind");
}

LinkScheme link_scheme_from_string(const std::string& name) {
  if (name == "bernoulli_static") return LinkScheme::BernoulliStatic;
  if (name == "bernoulli_time_varying") return LinkScheme::BernoulliTimeVarying;
  if (name == "markov_homogeneous") return LinkScheme::MarkovHomogeneous;
  if (name == "markov_nonhomogeneous") return LinkScheme::MarkovNonHomogeneous;
  if (name == "cyclic_fixed") return LinkScheme::CyclicFixed;
  if (name == "cyclic_reset") return LinkScheme::CyclicReset;
  throw ConfigError("unknown link_scheme: " + name);
}

std::string to_string(LinkScheme scheme) {
  switch (scheme) {
    case LinkScheme::BernoulliStatic: return "bernoulli_static";
    case LinkScheme::BernoulliTimeVarying: return "bernoulli_time_varying";
    case LinkScheme::MarkovHomogeneous: return "markov_homogeneous";
    case LinkScheme::MarkovNonHomogeneous: return "markov_nonhomogeneous";
    case LinkScheme::CyclicFixed: return "cyclic_fixed";
    case LinkScheme::CyclicReset: return "cyclic_reset";
  }
  throw InternalError("unreachable link scheme");
}

namespace {

const char* kKnownKeys[] = {
    "clients", "dim", "rounds", "local_steps", "algorithm",
    "link_scheme", "link_gamma", "link_period", "link_cycle_length",
    "link_delta", "link_probs", "link_prob_groups", "link_construct_probs",
    "prob_classes", "prob_alpha", "prob_mu0", "prob_sigma0",
    "objective", "optima", "optima_mean_scale", "optima_std", "ls_rows",
    "lr_schedule", "eta0", "sigma", "seeds", "output"};

template <typename T>
void read(const Json& j, const char* key, T& out) {
  if (j.contains(key)) {
    try {
      out = j.at(key).get<T>();
    } catch (const std::exception& e) {
      throw ConfigError(std::string("config field '") + key + "': " + e.what());
    }
  }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("config root must be a JSON object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* key : kKnownKeys)
      if (it.key() == key) known = true;
    if (!known) throw ConfigError("unknown config key: " + it.key());
  }

  ExperimentConfig cfg;
  read(j, "clients", cfg.clients);
  read(j, "dim", cfg.dim);
  read(j, "rounds", cfg.rounds);
  read(j, "local_steps", cfg.local_steps);
  if (j.contains("algorithm"))
    cfg.algorithm = algorithm_kind_from_string(j.at("algorithm").get<std::string>());
  if (j.contains("link_scheme"))
    cfg.link_scheme = link_scheme_from_string(j.at("link_scheme").get<std::string>());
  read(j, "link_gamma", cfg.link_gamma);
  read(j, "link_period", cfg.link_period);
  read(j, "link_cycle_length", cfg.link_cycle_length);
  read(j, "link_delta", cfg.link_delta);
  read(j, "link_probs", cfg.link_probs);
  if (j.contains("link_prob_groups")) {
    for (const auto& entry : j.at("link_prob_groups")) {
      if (!entry.is_array() || entry.size() != 2)
        throw ConfigError("link_prob_groups entries must be [count, p] pairs");
      cfg.link_prob_groups.emplace_back(entry[0].get<int>(),
                                        entry[1].get<double>());
    }
  }
  read(j, "link_construct_probs", cfg.link_construct_probs);
  read(j, "prob_classes", cfg.prob_classes);
  read(j, "prob_alpha", cfg.prob_alpha);
  read(j, "prob_mu0", cfg.prob_mu0);
  read(j, "prob_sigma0", cfg.prob_sigma0);
  read(j, "objective", cfg.objective);
  read(j, "optima", cfg.optima);
  read(j, "optima_mean_scale", cfg.optima_mean_scale);
  read(j, "optima_std", cfg.optima_std);
  read(j, "ls_rows", cfg.ls_rows);
  if (j.contains("lr_schedule")) {
    std::string s = j.at("lr_schedule").get<std::string>();
    if (s == "constant") cfg.lr_schedule = LrSchedule::Kind::Constant;
    else if (s == "decaying") cfg.lr_schedule = LrSchedule::Kind::Decaying;
    else throw ConfigError("lr_schedule must be 'constant' or 'decaying'");
  }
  read(j, "eta0", cfg.eta0);
  read(j, "sigma", cfg.sigma);
  read(j, "seeds", cfg.seeds);
  read(j, "output", cfg.output);
  return cfg;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("config parse error in " + path + ": " + e.what());
  }
  return from_json(j);
}

Json ExperimentConfig::to_json() const {
  Json j;
  j["clients"] = clients;
  j["dim"] = dim;
  j["rounds"] = rounds;
  j["local_steps"] = local_steps;
  j["algorithm"] = to_string(algorithm);
  j["link_scheme"] = to_string(link_scheme);
  j["link_gamma"] = link_gamma;
  j["link_period"] = link_period;
  j["link_cycle_length"] = link_cycle_length;
  j["link_delta"] = link_delta;
  j["link_probs"] = link_probs;
  Json groups = Json::array();
  for (const auto& [count, p] : link_prob_groups)
    groups.push_back(Json::array({count, p}));
  j["link_prob_groups"] = groups;
  j["link_construct_probs"] = link_construct_probs;
  j["prob_classes"] = prob_classes;
  j["prob_alpha"] = prob_alpha;
  j["prob_mu0"] = prob_mu0;
  j["prob_sigma0"] = prob_sigma0;
  j["objective"] = objective;
  j["optima"] = optima;
  j["optima_mean_scale"] = optima_mean_scale;
  j["optima_std"] = optima_std;
  j["ls_rows"] = ls_rows;
  j["lr_schedule"] =
      lr_schedule == LrSchedule::Kind::Constant ? "constant" : "decaying";
  j["eta0"] = eta0;
  j["sigma"] = sigma;
  j["seeds"] = seeds;
  j["output"] = output;
  return j;
}

std::string ExperimentConfig::serialize() const {
  // dump() sorts keys, so this form is canonical and round-trip stable.
  return to_json().dump(2) + "\n";
}

void ExperimentConfig::validate() const {
  if (clients <= 0) throw ConfigError("clients must be > 0");
  if (dim <= 0) throw ConfigError("dim must be > 0");
  if (rounds < 0) throw ConfigError("rounds must be >= 0");
  if (local_steps < 1) throw ConfigError("local_steps must be >= 1");
  if (eta0 <= 0.0) throw ConfigError("eta0 must be > 0");
  if (sigma < 0.0) throw ConfigError("sigma must be >= 0");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (link_gamma < 0.0 || link_gamma > 1.0)
    throw ConfigError("link_gamma must be in [0, 1]");
  if (link_period <= 0.0) throw ConfigError("link_period must be > 0");
  if (link_cycle_length <= 0) throw ConfigError("link_cycle_length must be > 0");
  if (link_delta < 0.0 || link_delta >= 1.0)
    throw ConfigError("link_delta must be in [0, 1)");

  int sources = 0;
  if (!link_probs.empty()) ++sources;
  if (!link_prob_groups.empty()) ++sources;
  if (link_construct_probs) ++sources;
  if (sources != 1)
    throw ConfigError(
        "exactly one of link_probs, link_prob_groups, link_construct_probs "
        "must be set");
  if (!link_probs.empty()) {
    if (static_cast<int>(link_probs.size()) != clients)
      throw ConfigError("link_probs must list one probability per client");
    for (double p : link_probs)
      if (!(p > 0.0 && p <= 1.0))
        throw ConfigError("link_probs values must be in (0, 1]");
  }
  if (!link_prob_groups.empty()) {
    int total = 0;
    for (const auto& [count, p] : link_prob_groups) {
      if (count <= 0) throw ConfigError("link_prob_groups counts must be > 0");
      if (!(p > 0.0 && p <= 1.0))
        throw ConfigError("link_prob_groups probabilities must be in (0, 1]");
      total += count;
    }
    if (total != clients)
      throw ConfigError("link_prob_groups counts must sum to clients");
  }
  if (link_construct_probs) {
    ProbConstructionConfig pc{clients, prob_classes, prob_alpha,
                              prob_mu0, prob_sigma0, link_delta};
    pc.validate();
  }

  const bool time_varying = link_scheme == LinkScheme::BernoulliTimeVarying ||
                            link_scheme == LinkScheme::MarkovNonHomogeneous;
  if (time_varying && link_gamma >= 0.5)
    throw ConfigError(
        "link_gamma >= 0.5 makes the implied lower bound of p_i^t, "
        "delta*(1 - 2*gamma), non-positive; choose gamma < 0.5");

  if (objective != "quadratic" && objective != "least_squares")
    throw ConfigError("objective must be 'quadratic' or 'least_squares'");
  if (!optima.empty()) {
    if (objective != "quadratic")
      throw ConfigError("explicit optima only apply to the quadratic objective");
    if (static_cast<int>(optima.size()) != clients)
      throw ConfigError("optima must list one vector per client");
    for (const auto& u : optima)
      if (static_cast<int>(u.size()) != dim)
        throw ConfigError("every optimum must have length dim");
  }
  if (optima_std < 0.0) throw ConfigError("optima_std must be >= 0");
  if (ls_rows < 0) throw ConfigError("ls_rows must be >= 0");
}

std::vector<double> ExperimentConfig::resolve_base_probs(
    std::uint64_t seed) const {
  if (!link_probs.empty()) return link_probs;
  if (!link_prob_groups.empty()) {
    std::vector<double> probs;
    probs.reserve(clients);
    for (const auto& [count, p] : link_prob_groups)
      probs.insert(probs.end(), count, p);
    return probs;
  }
  ProbConstructionConfig pc{clients, prob_classes, prob_alpha,
                            prob_mu0, prob_sigma0, link_delta};
  RngStream rng = derive_stream(seed, "prob_construct", 0, 0);
  return construct_base_probs(pc, rng);
}

LinkModelParams ExperimentConfig::link_params() const {
  return LinkModelParams{link_scheme, link_gamma, link_period,
                         link_cycle_length};
}

AlgorithmConfig ExperimentConfig::algorithm_config() const {
  AlgorithmConfig cfg;
  cfg.kind = algorithm;
  cfg.local_steps = local_steps;
  cfg.lr = LrSchedule{lr_schedule, eta0};
  cfg.sigma = sigma;
  return cfg;
}

}  // namespace fedsim
