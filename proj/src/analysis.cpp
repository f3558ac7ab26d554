#include "fedsim/analysis.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "fedsim/errors.hpp"

namespace fedsim {

namespace {

constexpr int kEnumLimit = 20;

void check_enum_size(std::size_t m, const char* who) {
  if (m > kEnumLimit)
    throw ConfigError(std::string(who) +
                      ": m exceeds the 2^m enumeration limit of 20; use the "
                      "Monte Carlo / DP variant instead");
}

void check_probs(const std::vector<double>& p, const char* who) {
  for (double pi : p) {
    if (!(pi > 0.0 && pi <= 1.0))
      throw ConfigError(std::string(who) + ": probabilities must be in (0, 1]");
  }
}

/// Adds weight * W(A)^2 into acc, using the closed form of the square:
/// (W^2)[j][j'] = 1/|A| when both in A, 1 on the diagonal outside A.
void accumulate_w2(Mat& acc, const std::vector<int>& members, int m,
                   double weight) {
  const int a = static_cast<int>(members.size());
  if (a <= 1) {
    for (int j = 0; j < m; ++j) acc(j, j) += weight;
    return;
  }
  const double w = weight / static_cast<double>(a);
  std::vector<bool> in(m, false);
  for (int j : members) in[j] = true;
  for (int j : members)
    for (int jp : members) acc(j, jp) += w;
  for (int j = 0; j < m; ++j)
    if (!in[j]) acc(j, j) += weight;
}

/// Calls visit(members, weight) for every subset of [m] with its Bernoulli
/// weight, via prefix-product DFS (no divisions, so p_i = 1 is exact).
template <typename Visit>
void for_each_subset(const std::vector<double>& p, Visit&& visit) {
  const int m = static_cast<int>(p.size());
  std::vector<int> members;
  members.reserve(m);
  // Recursive lambda; stack depth is at most m <= 20.
  auto recurse = [&](auto&& self, int idx, double weight) -> void {
    if (weight == 0.0) {
      // Skipping zero-weight branches keeps p_i = 1 cheap and exact.
      return;
    }
    if (idx == m) {
      visit(members, weight);
      return;
    }
    self(self, idx + 1, weight * (1.0 - p[idx]));
    members.push_back(idx);
    self(self, idx + 1, weight * p[idx]);
    members.pop_back();
  };
  recurse(recurse, 0, 1.0);
}

}  // namespace

Mat mixing_matrix(const ActiveSet& active, int m) {
  Mat w = Mat::Identity(m, m);
  const int a = active.size();
  if (a <= 1) return w;
  const double v = 1.0 / static_cast<double>(a);
  for (int i : active.members) {
    w(i, i) = v;
    for (int j : active.members)
      if (i != j) w(i, j) = v;
  }
  return w;
}

Mat expected_w2_exact(const std::vector<double>& p) {
  check_enum_size(p.size(), "expected_w2_exact");
  check_probs(p, "expected_w2_exact");
  const int m = static_cast<int>(p.size());
  Mat acc = Mat::Zero(m, m);
  for_each_subset(p, [&](const std::vector<int>& members, double weight) {
    accumulate_w2(acc, members, m, weight);
  });
  return acc;
}

Mat expected_w2_mc(const std::vector<double>& p, int samples, RngStream& rng) {
  check_probs(p, "expected_w2_mc");
  if (samples <= 0) throw ConfigError("expected_w2_mc: samples must be > 0");
  const int m = static_cast<int>(p.size());
  Mat acc = Mat::Zero(m, m);
  std::vector<int> members;
  for (int n = 0; n < samples; ++n) {
    members.clear();
    for (int i = 0; i < m; ++i)
      if (rng.uniform() < p[i]) members.push_back(i);
    accumulate_w2(acc, members, m, 1.0);
  }
  return acc / static_cast<double>(samples);
}

Mat expected_w2_mc_kofm(int m, int k, int samples, RngStream& rng) {
  if (k < 0 || k > m) throw ConfigError("expected_w2_mc_kofm: need 0 <= k <= m");
  if (samples <= 0) throw ConfigError("expected_w2_mc_kofm: samples must be > 0");
  Mat acc = Mat::Zero(m, m);
  std::vector<int> pool(m);
  for (int n = 0; n < samples; ++n) {
    for (int i = 0; i < m; ++i) pool[i] = i;
    // Partial Fisher-Yates: the first k entries become the sample.
    for (int i = 0; i < k; ++i) {
      int j = i + static_cast<int>(rng.uniform_below(m - i));
      std::swap(pool[i], pool[j]);
    }
    std::vector<int> members(pool.begin(), pool.begin() + k);
    accumulate_w2(acc, members, m, 1.0);
  }
  return acc / static_cast<double>(samples);
}

Mat expected_w2_exact_kofm(int m, int k) {
  if (k < 0 || k > m) throw ConfigError("expected_w2_exact_kofm: need 0 <= k <= m");
  Mat acc = Mat::Zero(m, m);
  if (k <= 1) return Mat::Identity(m, m);
  const double p_in = static_cast<double>(k) / m;
  const double p_pair =
      static_cast<double>(k) * (k - 1) / (static_cast<double>(m) * (m - 1));
  const double diag = (1.0 - p_in) + p_in / k;
  const double off = p_pair / k;
  acc.setConstant(off);
  acc.diagonal().setConstant(diag);
  return acc;
}

double rho_of(const Mat& m2) {
  const Eigen::Index m = m2.rows();
  if (m2.cols() != m || m < 2)
    throw ConfigError("rho_of: need a square matrix of order >= 2");
  if ((m2 - m2.transpose()).cwiseAbs().maxCoeff() > 1e-9)
    throw ConfigError("rho_of: matrix must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> solver(m2);
  if (solver.info() != Eigen::Success)
    throw InternalError("rho_of: eigensolver failed");
  return solver.eigenvalues()(m - 2);  // ascending order
}

SpectralReport ergodicity_check(const std::vector<double>& p) {
  SpectralReport report;
  report.m2 = expected_w2_exact(p);
  report.rho = rho_of(report.m2);
  report.c = *std::min_element(p.begin(), p.end());
  const int m = static_cast<int>(p.size());
  const double reach = 1.0 - std::pow(1.0 - report.c, m);
  report.bound_general =
      1.0 - std::pow(report.c, 4) * reach * reach / 8.0;
  report.within_bound = report.rho <= report.bound_general + 1e-12;
  return report;
}

SpectralReport ergodicity_check_kofm(int m, int k) {
  SpectralReport report;
  report.m2 = expected_w2_exact_kofm(m, k);
  report.rho = rho_of(report.m2);
  report.c = static_cast<double>(k) / m;
  const double reach = 1.0 - std::pow(1.0 - report.c, m);
  report.bound_general = 1.0 - std::pow(report.c, 4) * reach * reach / 8.0;
  report.bound_uniform_k = 1.0 - report.c * report.c / 8.0;
  report.within_bound = report.rho <= *report.bound_uniform_k + 1e-12;
  return report;
}

double inclusion_weight_closedform(const std::vector<double>& p, int i) {
  const int m = static_cast<int>(p.size());
  // Elementary symmetric polynomials of {p_z : z != i}.
  std::vector<double> e(m, 0.0);
  e[0] = 1.0;
  int used = 0;
  for (int z = 0; z < m; ++z) {
    if (z == i) continue;
    ++used;
    for (int k = used; k >= 1; --k) e[k] += e[k - 1] * p[z];
  }
  double inner = 0.0;
  for (int j = 1; j <= m; ++j) {
    double term = e[j - 1] / static_cast<double>(j);
    inner += (j % 2 == 1) ? term : -term;
  }
  return p[i] * inner;
}

double inclusion_weight_exact_dp(const std::vector<double>& p, int i) {
  const int m = static_cast<int>(p.size());
  // Distribution of B = sum_{j != i} X_j by iterative convolution.
  std::vector<double> dist(m, 0.0);
  dist[0] = 1.0;
  int count = 0;
  for (int z = 0; z < m; ++z) {
    if (z == i) continue;
    ++count;
    for (int b = count; b >= 1; --b)
      dist[b] = dist[b] * (1.0 - p[z]) + dist[b - 1] * p[z];
    dist[0] *= 1.0 - p[z];
  }
  double expectation = 0.0;
  for (int b = 0; b < m; ++b) expectation += dist[b] / (1.0 + b);
  return p[i] * expectation;
}

double inclusion_weight_oracle(const std::vector<double>& p, int i) {
  check_enum_size(p.size(), "inclusion_weight_oracle");
  check_probs(p, "inclusion_weight_oracle");
  double acc = 0.0;  // 0/0 = 0 convention: the empty set contributes nothing
  for_each_subset(p, [&](const std::vector<int>& members, double weight) {
    if (members.empty()) return;
    if (std::binary_search(members.begin(), members.end(), i))
      acc += weight / static_cast<double>(members.size());
  });
  const double closed = inclusion_weight_closedform(p, i);
  if (std::abs(acc - closed) > 1e-10)
    throw InternalError("inclusion weight: enumeration and closed form "
                        "disagree beyond 1e-10");
  return acc;
}

namespace {

Vec bias_from_weights(const std::vector<double>& p, const std::vector<Vec>& u,
                      const std::vector<double>& weights, const char* who) {
  if (p.size() != u.size() || p.empty())
    throw ConfigError(std::string(who) + ": p and u sizes must match");
  double none_active = 1.0;
  for (double pi : p) none_active *= 1.0 - pi;
  const double denom = 1.0 - none_active;
  if (denom <= 0.0)
    throw ConfigError(std::string(who) +
                      ": activation probabilities are all zero");
  Vec bias = Vec::Zero(u[0].size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (u[i].size() != bias.size())
      throw ConfigError(std::string(who) + ": optima dimension mismatch");
    bias += weights[i] * u[i];
  }
  return bias / denom;
}

}  // namespace

Vec fedavg_bias_closedform(const std::vector<double>& p,
                           const std::vector<Vec>& u) {
  check_enum_size(p.size(), "fedavg_bias_closedform");
  check_probs(p, "fedavg_bias_closedform");
  std::vector<double> weights(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    weights[i] = inclusion_weight_closedform(p, static_cast<int>(i));
  return bias_from_weights(p, u, weights, "fedavg_bias_closedform");
}

Vec fedavg_bias_exact(const std::vector<double>& p, const std::vector<Vec>& u) {
  check_probs(p, "fedavg_bias_exact");
  std::vector<double> weights(p.size());
  for (std::size_t i = 0; i < p.size(); ++i)
    weights[i] = inclusion_weight_exact_dp(p, static_cast<int>(i));
  return bias_from_weights(p, u, weights, "fedavg_bias_exact");
}

double consensus_error(const std::vector<Vec>& client_models) {
  if (client_models.empty())
    throw ConfigError("consensus_error: no client models");
  Vec mean = Vec::Zero(client_models[0].size());
  for (const Vec& x : client_models) mean += x;
  mean /= static_cast<double>(client_models.size());
  double acc = 0.0;
  for (const Vec& x : client_models) acc += (mean - x).squaredNorm();
  return acc / static_cast<double>(client_models.size());
}

}  // namespace fedsim
