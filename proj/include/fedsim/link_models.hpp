#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "fedsim/rng.hpp"
#include "fedsim/types.hpp"

namespace fedsim {

enum class LinkScheme {
  BernoulliStatic,
  BernoulliTimeVarying,
  MarkovHomogeneous,
  MarkovNonHomogeneous,
  CyclicFixed,
  CyclicReset,
};

/// Parameters of the base-probability construction pipeline: per-client class
/// mixtures from Dirichlet(alpha), a lognormal class-contribution vector
/// normalized to the simplex, and a clipping floor delta.
struct ProbConstructionConfig {
  int clients = 0;
  int classes = 0;
  double alpha = 0.0;   // Dirichlet concentration, > 0
  double mu0 = 0.0;     // lognormal location
  double sigma0 = 0.0;  // lognormal scale, >= 0
  double delta = 0.0;   // clipping floor in [0, 1)

  void validate() const;  // throws ConfigError
};

/// Samples the per-client base probabilities p_i = <r, nu_i>, clipped from
/// below by delta. All returned values are strictly positive.
std::vector<double> construct_base_probs(const ProbConstructionConfig& cfg,
                                         RngStream& rng);

/// p_i^t = p_i * [(1 - gamma) + gamma * sin(2*pi*t / period)].
double time_varying_prob(double base_prob, double gamma, double period, int t);

struct MarkovRates {
  double on_to_off;  // q
  double off_to_on;  // q*
};

/// Two-state chain rates whose stationary ON-probability is exactly p:
/// if 0.05*(1-p) <= p, q* = 0.05 and q = 0.05*(1-p)/p; otherwise
/// q* = p/(1-p) and q = 1. Requires p in (0, 1).
MarkovRates markov_transitions(double p);

/// Scheme-wide knobs shared by all clients.
struct LinkModelParams {
  LinkScheme scheme = LinkScheme::BernoulliStatic;
  double gamma = 0.0;      // sine fluctuation amplitude, [0, 1]
  double period = 40.0;    // sine period, > 0
  int cycle_length = 100;  // cyclic schemes, > 0
};

/// One client's availability process. sample() must be called with
/// consecutive rounds t = 0, 1, 2, ... (the Markov and cyclic-reset models
/// carry state between rounds).
class LinkProcess {
 public:
  virtual ~LinkProcess() = default;

  /// Marginal activation parameter driving round t (the p_i^t of Bernoulli
  /// models, the stationary target of Markov models, the duty fraction of
  /// cyclic models).
  virtual double prob_at(int t) const = 0;

  /// Declared lower bound c on the activation parameter; > 0 when the model
  /// is well posed.
  virtual double lower_bound() const = 0;

  virtual bool sample(int t) = 0;
};

class BernoulliProcess final : public LinkProcess {
 public:
  BernoulliProcess(std::uint64_t root_seed, int client, double base_prob,
                   double gamma, double period);

  double prob_at(int t) const override;
  double lower_bound() const override;
  bool sample(int t) override;

 private:
  std::uint64_t root_seed_;
  int client_;
  double base_prob_;
  double gamma_;
  double period_;
};

class MarkovProcess final : public LinkProcess {
 public:
  MarkovProcess(std::uint64_t root_seed, int client, double base_prob,
                bool homogeneous, double gamma, double period);

  double prob_at(int t) const override;
  double lower_bound() const override;
  bool sample(int t) override;

  bool state_on() const { return on_; }

 private:
  std::uint64_t root_seed_;
  int client_;
  double base_prob_;
  bool homogeneous_;
  double gamma_;
  double period_;
  bool on_ = false;
  int next_round_ = 0;
};

class CyclicProcess final : public LinkProcess {
 public:
  /// forced_offset, when set, bypasses the random offset draw (test hook and
  /// deterministic replays of a known schedule).
  CyclicProcess(std::uint64_t root_seed, int client, double base_prob,
                int cycle_length, bool reset_each_cycle,
                std::optional<int> forced_offset = std::nullopt);

  double prob_at(int t) const override;
  double lower_bound() const override;
  bool sample(int t) override;

  int active_rounds_per_cycle() const { return active_len_; }

 private:
  int offset_for_cycle(int cycle) const;

  std::uint64_t root_seed_;
  int client_;
  double base_prob_;
  int cycle_length_;
  int active_len_;
  bool reset_each_cycle_;
  std::optional<int> forced_offset_;
};

/// The m per-client processes of one experiment. Owns their mutable state;
/// sample() must be called with consecutive rounds starting at 0.
class LinkEnsemble {
 public:
  LinkEnsemble(const LinkModelParams& params, std::vector<double> base_probs,
               std::uint64_t root_seed);

  ActiveSet sample(int t);

  double prob_at(int client, int t) const;
  double base_prob(int client) const { return base_probs_[client]; }
  const std::vector<double>& base_probs() const { return base_probs_; }

  /// min over clients of the per-process lower bound.
  double lower_bound() const;

  int clients() const { return static_cast<int>(processes_.size()); }

 private:
  std::vector<double> base_probs_;
  std::vector<std::unique_ptr<LinkProcess>> processes_;
  int next_round_ = 0;
};

/// Per-client empirical mean of t - tau_i(t) over a trace of active sets,
/// where tau_i(t) is the most recent round before t with i active. Rounds
/// before a client's first activation are excluded; NaN if never active.
std::vector<double> staleness_stats(const std::vector<ActiveSet>& trace, int m);

}  // namespace fedsim
