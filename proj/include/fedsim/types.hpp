#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <vector>

namespace fedsim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Set of clients whose uplink is active in a given round.
struct ActiveSet {
  int round = 0;
  std::vector<int> members;  // sorted, unique, each in [0, m)

  bool contains(int client) const {
    return std::binary_search(members.begin(), members.end(), client);
  }
  int size() const { return static_cast<int>(members.size()); }
  bool empty() const { return members.empty(); }
};

/// Mutable state of one simulation run.
///
/// Under FedPBC, client_models[i] is the model client i will start its next
/// round from (the last broadcast it received, advanced by its own local
/// steps while offline). Under the FedAvg-style baselines every entry equals
/// the latest broadcast.
struct SimState {
  int round = 0;
  Vec server_model;
  std::vector<Vec> client_models;
  std::vector<int> last_active;   // last round each client was active; -1 if never
  std::vector<Vec> mifa_memory;   // per-client stored deltas; empty unless MIFA
};

}  // namespace fedsim
