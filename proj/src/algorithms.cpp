#include "fedsim/algorithms.hpp"

#include <cmath>

#include "fedsim/errors.hpp"

namespace fedsim {

double LrSchedule::at(int t) const {
  if (kind == Kind::Constant) return eta0;
  return eta0 / std::sqrt(static_cast<double>(t) / 10.0 + 1.0);
}

Vec local_sgd(const Objective& obj, int client, Vec x, int steps, double eta,
              double sigma, RngStream& rng) {
  Vec g(x.size());
  for (int k = 0; k < steps; ++k) {
    obj.client_grad_into(client, x, g);
    if (sigma > 0.0) {
      for (Eigen::Index j = 0; j < g.size(); ++j) g(j) += sigma * rng.normal();
    }
    x.noalias() -= eta * g;
  }
  return x;
}

SimState make_initial_state(const AlgorithmConfig& cfg, const Objective& obj,
                            const Vec& x0) {
  if (x0.size() != obj.dim())
    throw ConfigError("initial model dimension does not match objective");
  SimState state;
  state.server_model = x0;
  state.client_models.assign(obj.clients(), x0);
  state.last_active.assign(obj.clients(), -1);
  if (cfg.kind == AlgorithmKind::Mifa)
    state.mifa_memory.assign(obj.clients(), Vec::Zero(obj.dim()));
  return state;
}

namespace {

Vec run_local(const Objective& obj, int client, const Vec& start,
              const AlgorithmConfig& cfg, double eta, std::uint64_t root_seed,
              int round) {
  RngStream rng = derive_stream(root_seed, "grad", client, round);
  return local_sgd(obj, client, start, cfg.local_steps, eta, cfg.sigma, rng);
}

}  // namespace

void run_round(SimState& state, const ActiveSet& active,
               const AlgorithmConfig& cfg, const Objective& obj,
               const std::vector<double>& probs_at_t, std::uint64_t root_seed) {
  if (cfg.local_steps < 1) throw ConfigError("local_steps must be >= 1");
  const int m = obj.clients();
  const int t = state.round;
  const double eta = cfg.lr.at(t);
  const double m_inv = 1.0 / static_cast<double>(m);

  if (cfg.kind == AlgorithmKind::FedPbc) {
    // Every client advances from its own model; only active clients receive
    // the postponed broadcast.
    std::vector<Vec> locals(m);
    for (int i = 0; i < m; ++i)
      locals[i] = run_local(obj, i, state.client_models[i], cfg, eta,
                            root_seed, t);
    if (!active.empty()) {
      Vec avg = Vec::Zero(obj.dim());
      for (int i : active.members) avg += locals[i];
      avg /= static_cast<double>(active.size());
      state.server_model = avg;
      for (int i = 0; i < m; ++i)
        state.client_models[i] = active.contains(i) ? avg : locals[i];
    } else {
      for (int i = 0; i < m; ++i) state.client_models[i] = std::move(locals[i]);
    }
  } else {
    // FedAvg-style baselines: every client starts from the round's broadcast,
    // so only active clients' local runs affect the update.
    const Vec& x = state.server_model;
    Vec next;
    switch (cfg.kind) {
      case AlgorithmKind::FedAvg: {
        if (active.empty()) {
          next = x;
        } else {
          next = Vec::Zero(obj.dim());
          for (int i : active.members)
            next += run_local(obj, i, x, cfg, eta, root_seed, t);
          next /= static_cast<double>(active.size());
        }
        break;
      }
      case AlgorithmKind::FedAvgAll: {
        next = x;
        for (int i : active.members)
          next += m_inv * (run_local(obj, i, x, cfg, eta, root_seed, t) - x);
        break;
      }
      case AlgorithmKind::FedAvgKnownP: {
        if (static_cast<int>(probs_at_t.size()) != m)
          throw ConfigError("FedAvg-known-p needs one p_i^t per client");
        next = x;
        for (int i : active.members) {
          if (!(probs_at_t[i] > 0.0))
            throw ConfigError("FedAvg-known-p: p_i^t must be > 0");
          next += m_inv / probs_at_t[i] *
                  (run_local(obj, i, x, cfg, eta, root_seed, t) - x);
        }
        break;
      }
      case AlgorithmKind::Mifa: {
        for (int i : active.members)
          state.mifa_memory[i] = run_local(obj, i, x, cfg, eta, root_seed, t) - x;
        next = x;
        for (int i = 0; i < m; ++i) next += m_inv * state.mifa_memory[i];
        break;
      }
      default:
        throw InternalError("run_round: unhandled algorithm kind");
    }
    state.server_model = std::move(next);
    for (int i = 0; i < m; ++i) state.client_models[i] = state.server_model;
  }

  for (int i : active.members) state.last_active[i] = t;
  ++state.round;
}

}  // namespace fedsim
