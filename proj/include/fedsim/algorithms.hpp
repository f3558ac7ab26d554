#pragma once

#include <cstdint>
#include <vector>

#include "fedsim/objectives.hpp"
#include "fedsim/rng.hpp"
#include "fedsim/types.hpp"

namespace fedsim {

enum class AlgorithmKind { FedPbc, FedAvg, FedAvgAll, FedAvgKnownP, Mifa };

struct LrSchedule {
  enum class Kind { Constant, Decaying } kind = Kind::Constant;
  double eta0 = 0.1;

  /// Constant: eta0. Decaying: eta0 / sqrt(t/10 + 1).
  double at(int t) const;
};

struct AlgorithmConfig {
  AlgorithmKind kind = AlgorithmKind::FedPbc;
  int local_steps = 1;  // s >= 1
  LrSchedule lr;
  double sigma = 0.0;  // gradient noise std
};

/// s sequential stochastic-gradient steps from x with fixed step size eta.
Vec local_sgd(const Objective& obj, int client, Vec x, int steps, double eta,
              double sigma, RngStream& rng);

/// Fresh state with every model at x0 (MIFA memory zeroed when applicable).
SimState make_initial_state(const AlgorithmConfig& cfg, const Objective& obj,
                            const Vec& x0);

/// Advances state by one round of the configured algorithm.
///
/// Gradient-noise streams are derived from (root_seed, "grad", client, round),
/// so two algorithms fed the same seed see identical stochastic gradients.
/// probs_at_t is only consulted by FedAvg-known-p (the p_i^t weights) and may
/// be empty otherwise.
void run_round(SimState& state, const ActiveSet& active,
               const AlgorithmConfig& cfg, const Objective& obj,
               const std::vector<double>& probs_at_t, std::uint64_t root_seed);

}  // namespace fedsim
