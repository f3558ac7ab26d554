#pragma once

#include <optional>
#include <vector>

#include "fedsim/rng.hpp"
#include "fedsim/types.hpp"

namespace fedsim {

/// Gossip matrix induced by an active set: W[i][j] = 1/|A| when both i and j
/// are in A, 1 on the diagonal for clients outside A, 0 elsewhere. Symmetric
/// and doubly stochastic; the identity when |A| <= 1.
Mat mixing_matrix(const ActiveSet& active, int m);

/// E[W(A)^2] under independent Bernoulli(p_i) activation, by exact
/// enumeration of all 2^m subsets. Requires m <= 20.
Mat expected_w2_exact(const std::vector<double>& p);

/// Monte Carlo estimate of E[W(A)^2] under independent Bernoulli(p_i).
Mat expected_w2_mc(const std::vector<double>& p, int samples, RngStream& rng);

/// Monte Carlo estimate of E[W(A)^2] when A is a uniform size-k subset.
Mat expected_w2_mc_kofm(int m, int k, int samples, RngStream& rng);

/// Exact E[W(A)^2] for uniform size-k subsets, from the pair-inclusion
/// probabilities (W(A)^2 = W(A), so only P(j in A) and P(j, j' in A) enter).
Mat expected_w2_exact_kofm(int m, int k);

/// Second largest eigenvalue of a symmetric doubly stochastic matrix.
double rho_of(const Mat& m2);

struct SpectralReport {
  Mat m2;
  double rho = 0.0;
  double c = 0.0;              // declared lower bound min p_i (or k/m)
  double bound_general = 1.0;  // 1 - c^4 [1 - (1-c)^m]^2 / 8
  std::optional<double> bound_uniform_k;  // 1 - (k/m)^2 / 8 when applicable
  bool within_bound = false;
};

/// Exact rho for Bernoulli(p) activation checked against the general
/// ergodicity bound. Requires m <= 20.
SpectralReport ergodicity_check(const std::vector<double>& p);

/// Exact rho for uniform k-of-m sampling checked against the tightened bound.
SpectralReport ergodicity_check_kofm(int m, int k);

/// E[X_i / sum_j X_j] for independent X_j ~ Bernoulli(p_j), with the 0/0 = 0
/// convention, by exact 2^m enumeration. Cross-checks the result against the
/// closed-form alternating sum and throws InternalError if they disagree by
/// more than 1e-10. Requires m <= 20.
double inclusion_weight_oracle(const std::vector<double>& p, int i);

/// Closed-form route: p_i * sum_{j=1}^m (-1)^{j+1} (1/j) e_{j-1}(p without i),
/// where e_k is the elementary symmetric polynomial.
double inclusion_weight_closedform(const std::vector<double>& p, int i);

/// Scalable exact route via the distribution of sum_{j != i} X_j (O(m^2));
/// usable far beyond the 2^m enumeration limit.
double inclusion_weight_exact_dp(const std::vector<double>& p, int i);

/// Expected FedAvg limit point for the quadratic objective under static
/// Bernoulli(p_i) activation:
///   sum_i p_i u_i [1 + sum_{j>=2} (-1)^{j+1} (1/j) e_{j-1}(p \ i)]
///     / [1 - prod_i (1 - p_i)].
/// Requires m <= 20 (use fedavg_bias_exact for larger m).
Vec fedavg_bias_closedform(const std::vector<double>& p,
                           const std::vector<Vec>& u);

/// Same limit computed with the O(m^2) inclusion-weight route; exact for any
/// m (this is the desk-scale evaluator for grouped large-m structures).
Vec fedavg_bias_exact(const std::vector<double>& p, const std::vector<Vec>& u);

/// (1/m) sum_i ||xbar - x_i||^2 with xbar the mean of the client models.
double consensus_error(const std::vector<Vec>& client_models);

}  // namespace fedsim
