#include "fedsim/objectives.hpp"

#include "fedsim/errors.hpp"

namespace fedsim {

QuadraticObjective::QuadraticObjective(std::vector<Vec> optima)
    : optima_(std::move(optima)) {
  if (optima_.empty()) throw ConfigError("quadratic objective: no clients");
  const Eigen::Index d = optima_[0].size();
  for (const Vec& u : optima_) {
    if (u.size() != d)
      throw ConfigError("quadratic objective: dimension mismatch among optima");
  }
  minimizer_ = Vec::Zero(d);
  for (const Vec& u : optima_) minimizer_ += u;
  minimizer_ /= static_cast<double>(optima_.size());
}

double QuadraticObjective::value(const Vec& x) const {
  double acc = 0.0;
  for (const Vec& u : optima_) acc += (x - u).squaredNorm();
  return acc / (2.0 * static_cast<double>(optima_.size()));
}

void QuadraticObjective::client_grad_into(int client, const Vec& x,
                                          Vec& out) const {
  if (x.size() != optima_[client].size())
    throw ConfigError("quadratic objective: dimension mismatch");
  out = x - optima_[client];
}

LeastSquaresObjective::LeastSquaresObjective(std::vector<Mat> design,
                                             std::vector<Vec> targets)
    : design_(std::move(design)), targets_(std::move(targets)) {
  if (design_.empty() || design_.size() != targets_.size())
    throw ConfigError("least squares: inconsistent client data");
  const Eigen::Index d = design_[0].cols();
  Mat normal = Mat::Zero(d, d);
  Vec rhs = Vec::Zero(d);
  for (std::size_t i = 0; i < design_.size(); ++i) {
    if (design_[i].cols() != d || design_[i].rows() != targets_[i].size())
      throw ConfigError("least squares: shape mismatch");
    normal += design_[i].transpose() * design_[i];
    rhs += design_[i].transpose() * targets_[i];
  }
  minimizer_ = normal.ldlt().solve(rhs);
}

LeastSquaresObjective LeastSquaresObjective::random(int clients, int dim,
                                                    int rows, RngStream& rng) {
  std::vector<Mat> design(clients);
  std::vector<Vec> targets(clients);
  for (int i = 0; i < clients; ++i) {
    design[i] = Mat(rows, dim);
    targets[i] = Vec(rows);
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < dim; ++c) design[i](r, c) = rng.normal();
      targets[i](r) = rng.normal();
    }
  }
  return LeastSquaresObjective(std::move(design), std::move(targets));
}

double LeastSquaresObjective::value(const Vec& x) const {
  double acc = 0.0;
  for (std::size_t i = 0; i < design_.size(); ++i)
    acc += (design_[i] * x - targets_[i]).squaredNorm();
  return acc / (2.0 * static_cast<double>(design_.size()));
}

void LeastSquaresObjective::client_grad_into(int client, const Vec& x,
                                             Vec& out) const {
  out = design_[client].transpose() * (design_[client] * x - targets_[client]);
}

Vec LeastSquaresObjective::global_grad(const Vec& x) const {
  Vec g = Vec::Zero(x.size());
  Vec tmp(x.size());
  for (int i = 0; i < clients(); ++i) {
    client_grad_into(i, x, tmp);
    g += tmp;
  }
  return g / static_cast<double>(clients());
}

Vec grad_stochastic(const Objective& obj, int client, const Vec& x,
                    double sigma, RngStream& rng) {
  Vec g = obj.client_grad(client, x);
  if (sigma > 0.0) {
    for (Eigen::Index k = 0; k < g.size(); ++k) g(k) += sigma * rng.normal();
  }
  return g;
}

GlobalMetrics global_metrics(const Objective& obj, const Vec& x) {
  return GlobalMetrics{obj.value(x), obj.global_grad(x).norm(),
                       (x - obj.minimizer()).norm()};
}

}  // namespace fedsim
