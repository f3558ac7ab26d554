#include "fedsim/link_models.hpp"

#include <cmath>
#include <limits>

#include "fedsim/errors.hpp"

namespace fedsim {

void ProbConstructionConfig::validate() const {
  if (clients <= 0) throw ConfigError("prob construction: clients must be > 0");
  if (classes <= 0) throw ConfigError("prob construction: classes must be > 0");
  if (alpha <= 0.0) throw ConfigError("prob construction: alpha must be > 0");
  if (sigma0 < 0.0) throw ConfigError("prob construction: sigma0 must be >= 0");
  if (delta < 0.0 || delta >= 1.0)
    throw ConfigError("prob construction: delta must be in [0, 1)");
}

std::vector<double> construct_base_probs(const ProbConstructionConfig& cfg,
                                         RngStream& rng) {
  cfg.validate();
  const int c = cfg.classes;

  // Class contribution vector r = r' / ||r'||_1, entries lognormal(mu0, sigma0^2).
  std::vector<double> r(c);
  double r_sum = 0.0;
  for (int k = 0; k < c; ++k) {
    r[k] = std::exp(cfg.mu0 + cfg.sigma0 * rng.normal());
    r_sum += r[k];
  }
  for (int k = 0; k < c; ++k) r[k] /= r_sum;

  std::vector<double> probs(cfg.clients);
  std::vector<double> nu(c);
  for (int i = 0; i < cfg.clients; ++i) {
    // nu_i ~ Dirichlet(alpha) via normalized Gamma(alpha, 1) draws.
    double nu_sum = 0.0;
    for (int k = 0; k < c; ++k) {
      nu[k] = rng.gamma(cfg.alpha);
      nu_sum += nu[k];
    }
    double p = 0.0;
    for (int k = 0; k < c; ++k) p += r[k] * nu[k] / nu_sum;
    probs[i] = std::max(cfg.delta, p);
  }
  return probs;
}

double time_varying_prob(double base_prob, double gamma, double period, int t) {
  double eps = std::sin(2.0 * M_PI * static_cast<double>(t) / period);
  return base_prob * ((1.0 - gamma) + gamma * eps);
}

MarkovRates markov_transitions(double p) {
  if (!(p > 0.0 && p < 1.0))
    throw ConfigError("markov_transitions: p must be in (0, 1)");
  if (0.05 * (1.0 - p) <= p) {
    return MarkovRates{0.05 * (1.0 - p) / p, 0.05};
  }
  return MarkovRates{1.0, p / (1.0 - p)};
}

// ---------------------------------------------------------------------------
// Bernoulli

BernoulliProcess::BernoulliProcess(std::uint64_t root_seed, int client,
                                   double base_prob, double gamma,
                                   double period)
    : root_seed_(root_seed),
      client_(client),
      base_prob_(base_prob),
      gamma_(gamma),
      period_(period) {}

double BernoulliProcess::prob_at(int t) const {
  if (gamma_ == 0.0) return base_prob_;
  return time_varying_prob(base_prob_, gamma_, period_, t);
}

double BernoulliProcess::lower_bound() const {
  if (gamma_ == 0.0) return base_prob_;
  return std::max(0.0, base_prob_ * (1.0 - 2.0 * gamma_));
}

bool BernoulliProcess::sample(int t) {
  RngStream rng = derive_stream(root_seed_, "link", client_, t);
  return rng.uniform() < prob_at(t);
}

// ---------------------------------------------------------------------------
// Markov

MarkovProcess::MarkovProcess(std::uint64_t root_seed, int client,
                             double base_prob, bool homogeneous, double gamma,
                             double period)
    : root_seed_(root_seed),
      client_(client),
      base_prob_(base_prob),
      homogeneous_(homogeneous),
      gamma_(gamma),
      period_(period) {}

double MarkovProcess::prob_at(int t) const {
  if (homogeneous_ || gamma_ == 0.0) return base_prob_;
  return time_varying_prob(base_prob_, gamma_, period_, t);
}

double MarkovProcess::lower_bound() const {
  if (homogeneous_ || gamma_ == 0.0) return base_prob_;
  return std::max(0.0, base_prob_ * (1.0 - 2.0 * gamma_));
}

bool MarkovProcess::sample(int t) {
  if (t != next_round_)
    throw InternalError("MarkovProcess::sample: rounds must be consecutive");
  ++next_round_;
  RngStream rng = derive_stream(root_seed_, "link", client_, t);
  if (t == 0) {
    // Initial state from Bernoulli(p_i^0); no transition in round 0.
    on_ = rng.uniform() < prob_at(0);
    return on_;
  }
  MarkovRates rates = markov_transitions(prob_at(t));
  double u = rng.uniform();
  if (on_) {
    on_ = !(u < rates.on_to_off);
  } else {
    on_ = u < rates.off_to_on;
  }
  return on_;
}

// ---------------------------------------------------------------------------
// Cyclic

CyclicProcess::CyclicProcess(std::uint64_t root_seed, int client,
                             double base_prob, int cycle_length,
                             bool reset_each_cycle,
                             std::optional<int> forced_offset)
    : root_seed_(root_seed),
      client_(client),
      base_prob_(base_prob),
      cycle_length_(cycle_length),
      reset_each_cycle_(reset_each_cycle),
      forced_offset_(forced_offset) {
  if (cycle_length <= 0) throw ConfigError("cyclic: cycle_length must be > 0");
  // Durations are rounded to whole rounds, with at least one active round
  // whenever base_prob > 0.
  active_len_ = static_cast<int>(std::lround(base_prob * cycle_length));
  if (base_prob > 0.0 && active_len_ < 1) active_len_ = 1;
  if (active_len_ > cycle_length_) active_len_ = cycle_length_;
}

double CyclicProcess::prob_at(int /*t*/) const { return base_prob_; }

double CyclicProcess::lower_bound() const { return base_prob_; }

int CyclicProcess::offset_for_cycle(int cycle) const {
  if (forced_offset_) return *forced_offset_;
  int inactive_len = cycle_length_ - active_len_;
  if (inactive_len <= 0) return 0;
  int draw_cycle = reset_each_cycle_ ? cycle : 0;
  RngStream rng = derive_stream(root_seed_, "link_offset", client_, draw_cycle);
  return static_cast<int>(
      rng.uniform_below(static_cast<std::uint64_t>(inactive_len) + 1));
}

bool CyclicProcess::sample(int t) {
  if (active_len_ == 0) return false;
  int cycle = t / cycle_length_;
  int pos = t - cycle * cycle_length_;
  int offset = offset_for_cycle(cycle);
  return pos >= offset && pos < offset + active_len_;
}

// ---------------------------------------------------------------------------
// Ensemble

LinkEnsemble::LinkEnsemble(const LinkModelParams& params,
                           std::vector<double> base_probs,
                           std::uint64_t root_seed)
    : base_probs_(std::move(base_probs)) {
  const int m = static_cast<int>(base_probs_.size());
  if (m == 0) throw ConfigError("link ensemble: no clients");

  const bool time_varying = params.scheme == LinkScheme::BernoulliTimeVarying ||
                            params.scheme == LinkScheme::MarkovNonHomogeneous;
  if (params.gamma < 0.0 || params.gamma > 1.0)
    throw ConfigError("link ensemble: gamma must be in [0, 1]");
  if (params.period <= 0.0)
    throw ConfigError("link ensemble: period must be > 0");
  if (time_varying && params.gamma >= 0.5) {
    throw ConfigError(
        "link ensemble: gamma >= 0.5 drives the lower bound of p_i^t, "
        "delta*(1 - 2*gamma), to zero or below; clip base probabilities with "
        "a delta floor and choose gamma < 0.5");
  }

  const bool markov = params.scheme == LinkScheme::MarkovHomogeneous ||
                      params.scheme == LinkScheme::MarkovNonHomogeneous;
  for (int i = 0; i < m; ++i) {
    double p = base_probs_[i];
    if (!(p > 0.0 && p <= 1.0))
      throw ConfigError("link ensemble: base probabilities must be in (0, 1]");
    if (markov && p >= 1.0)
      throw ConfigError("link ensemble: Markov schemes need p in (0, 1)");
  }

  processes_.reserve(m);
  for (int i = 0; i < m; ++i) {
    double p = base_probs_[i];
    switch (params.scheme) {
      case LinkScheme::BernoulliStatic:
        processes_.push_back(
            std::make_unique<BernoulliProcess>(root_seed, i, p, 0.0, params.period));
        break;
      case LinkScheme::BernoulliTimeVarying:
        processes_.push_back(std::make_unique<BernoulliProcess>(
            root_seed, i, p, params.gamma, params.period));
        break;
      case LinkScheme::MarkovHomogeneous:
        processes_.push_back(std::make_unique<MarkovProcess>(
            root_seed, i, p, /*homogeneous=*/true, 0.0, params.period));
        break;
      case LinkScheme::MarkovNonHomogeneous:
        processes_.push_back(std::make_unique<MarkovProcess>(
            root_seed, i, p, /*homogeneous=*/false, params.gamma, params.period));
        break;
      case LinkScheme::CyclicFixed:
        processes_.push_back(std::make_unique<CyclicProcess>(
            root_seed, i, p, params.cycle_length, /*reset_each_cycle=*/false));
        break;
      case LinkScheme::CyclicReset:
        processes_.push_back(std::make_unique<CyclicProcess>(
            root_seed, i, p, params.cycle_length, /*reset_each_cycle=*/true));
        break;
    }
  }
}

ActiveSet LinkEnsemble::sample(int t) {
  if (t != next_round_)
    throw InternalError("LinkEnsemble::sample: rounds must be consecutive");
  ++next_round_;
  ActiveSet active;
  active.round = t;
  for (int i = 0; i < clients(); ++i) {
    if (processes_[i]->sample(t)) active.members.push_back(i);
  }
  return active;
}

double LinkEnsemble::prob_at(int client, int t) const {
  return processes_[client]->prob_at(t);
}

double LinkEnsemble::lower_bound() const {
  double c = 1.0;
  for (const auto& p : processes_) c = std::min(c, p->lower_bound());
  return c;
}

std::vector<double> staleness_stats(const std::vector<ActiveSet>& trace, int m) {
  if (trace.empty()) throw ConfigError("staleness_stats: empty trace");
  std::vector<double> gap_sum(m, 0.0);
  std::vector<long> gap_count(m, 0);
  std::vector<int> last(m, -1);
  for (const ActiveSet& active : trace) {
    int t = active.round;
    for (int i = 0; i < m; ++i) {
      if (last[i] >= 0) {
        gap_sum[i] += t - last[i];
        ++gap_count[i];
      }
    }
    for (int i : active.members) last[i] = t;
  }
  std::vector<double> means(m);
  for (int i = 0; i < m; ++i) {
    means[i] = gap_count[i] > 0
                   ? gap_sum[i] / static_cast<double>(gap_count[i])
                   : std::numeric_limits<double>::quiet_NaN();
  }
  return means;
}

}  // namespace fedsim
