#pragma once

#include <vector>

#include "fedsim/rng.hpp"
#include "fedsim/types.hpp"

namespace fedsim {

/// A finite-sum objective F(x) = (1/m) sum_i F_i(x) with a computable
/// global minimizer.
class Objective {
 public:
  virtual ~Objective() = default;

  virtual int dim() const = 0;
  virtual int clients() const = 0;

  virtual double value(const Vec& x) const = 0;
  virtual void client_grad_into(int client, const Vec& x, Vec& out) const = 0;
  virtual Vec global_grad(const Vec& x) const = 0;
  virtual const Vec& minimizer() const = 0;

  Vec client_grad(int client, const Vec& x) const {
    Vec g(dim());
    client_grad_into(client, x, g);
    return g;
  }
};

/// F_i(x) = 1/2 ||x - u_i||^2, so F has minimizer x* = mean(u_i) and
/// grad F(x) = x - x*.
class QuadraticObjective final : public Objective {
 public:
  explicit QuadraticObjective(std::vector<Vec> optima);

  int dim() const override { return static_cast<int>(minimizer_.size()); }
  int clients() const override { return static_cast<int>(optima_.size()); }
  double value(const Vec& x) const override;
  void client_grad_into(int client, const Vec& x, Vec& out) const override;
  Vec global_grad(const Vec& x) const override { return x - minimizer_; }
  const Vec& minimizer() const override { return minimizer_; }

  const Vec& optimum(int client) const { return optima_[client]; }

 private:
  std::vector<Vec> optima_;
  Vec minimizer_;
};

/// F_i(x) = 1/2 ||A_i x - b_i||^2 with per-client random A_i, b_i; exercises
/// non-identical curvature while keeping x* computable in closed form.
class LeastSquaresObjective final : public Objective {
 public:
  LeastSquaresObjective(std::vector<Mat> design, std::vector<Vec> targets);

  /// Random instance with n rows per client; entries drawn from rng.
  static LeastSquaresObjective random(int clients, int dim, int rows,
                                      RngStream& rng);

  int dim() const override { return static_cast<int>(minimizer_.size()); }
  int clients() const override { return static_cast<int>(design_.size()); }
  double value(const Vec& x) const override;
  void client_grad_into(int client, const Vec& x, Vec& out) const override;
  Vec global_grad(const Vec& x) const override;
  const Vec& minimizer() const override { return minimizer_; }

 private:
  std::vector<Mat> design_;
  std::vector<Vec> targets_;
  Vec minimizer_;
};

/// Exact gradient plus isotropic Gaussian noise of per-coordinate std sigma.
Vec grad_stochastic(const Objective& obj, int client, const Vec& x,
                    double sigma, RngStream& rng);

struct GlobalMetrics {
  double value;      // F(x)
  double grad_norm;  // ||grad F(x)||
  double dist;       // ||x - x*||
};

GlobalMetrics global_metrics(const Objective& obj, const Vec& x);

}  // namespace fedsim
