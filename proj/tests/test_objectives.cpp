#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fedsim/objectives.hpp"
#include "fedsim/rng.hpp"

using namespace fedsim;

namespace {

QuadraticObjective two_client_quadratic() {
  Vec u0(2), u1(2);
  u0 << 1.0, 0.0;
  u1 << 3.0, 4.0;
  return QuadraticObjective({u0, u1});
}

}  // namespace

TEST_CASE("quadratic client gradient is x - u_i") {
  auto obj = two_client_quadratic();
  Vec x(2);
  x << 5.0, 5.0;
  Vec g = obj.client_grad(0, x);
  CHECK(g(0) == doctest::Approx(4.0));
  CHECK(g(1) == doctest::Approx(5.0));
  g = obj.client_grad(1, x);
  CHECK(g(0) == doctest::Approx(2.0));
  CHECK(g(1) == doctest::Approx(1.0));
}

TEST_CASE("quadratic minimizer is the mean of the client optima") {
  auto obj = two_client_quadratic();
  CHECK(obj.minimizer()(0) == doctest::Approx(2.0));
  CHECK(obj.minimizer()(1) == doctest::Approx(2.0));
  CHECK(obj.global_grad(obj.minimizer()).norm() == doctest::Approx(0.0));
}

TEST_CASE("quadratic value at the minimizer equals the residual spread") {
  auto obj = two_client_quadratic();
  // F(x*) = (1/m) sum_i 1/2 ||x* - u_i||^2, here 0.5 * (5 + 5) / 2 = 2.5.
  CHECK(obj.value(obj.minimizer()) == doctest::Approx(2.5));
}

TEST_CASE("global gradient is the mean of client gradients") {
  RngStream rng = derive_stream(7, "objective", 0, 0);
  auto obj = LeastSquaresObjective::random(5, 4, 8, rng);
  Vec x(4);
  for (int k = 0; k < 4; ++k) x(k) = rng.normal();
  Vec mean = Vec::Zero(4);
  for (int i = 0; i < 5; ++i) mean += obj.client_grad(i, x);
  mean /= 5.0;
  CHECK((obj.global_grad(x) - mean).norm() <= 1e-12);
}

TEST_CASE("least-squares gradients match finite differences") {
  RngStream rng = derive_stream(9, "objective", 0, 0);
  auto obj = LeastSquaresObjective::random(3, 5, 7, rng);
  Vec x(5);
  for (int k = 0; k < 5; ++k) x(k) = rng.normal();
  Vec g = obj.global_grad(x);
  const double h = 1e-4;
  for (int k = 0; k < 5; ++k) {
    Vec xp = x, xm = x;
    xp(k) += h;
    xm(k) -= h;
    double fd = (obj.value(xp) - obj.value(xm)) / (2.0 * h);
    CHECK(g(k) == doctest::Approx(fd).epsilon(1e-6));
  }
}

TEST_CASE("least-squares minimizer zeroes the global gradient") {
  RngStream rng = derive_stream(13, "objective", 0, 0);
  auto obj = LeastSquaresObjective::random(4, 6, 10, rng);
  CHECK(obj.global_grad(obj.minimizer()).norm() <= 1e-9);
}

TEST_CASE("stochastic gradient is unbiased with the declared variance") {
  auto obj = two_client_quadratic();
  Vec x(2);
  x << 0.0, 0.0;
  Vec exact = obj.client_grad(0, x);
  const double sigma = 0.5;
  const int n = 200000;
  RngStream rng = derive_stream(17, "grad", 0, 0);
  Vec sum = Vec::Zero(2), sumsq = Vec::Zero(2);
  for (int k = 0; k < n; ++k) {
    Vec g = grad_stochastic(obj, 0, x, sigma, rng);
    sum += g;
    sumsq += (g - exact).cwiseProduct(g - exact);
  }
  Vec mean = sum / n;
  double se = sigma / std::sqrt(static_cast<double>(n));
  for (int k = 0; k < 2; ++k) {
    CHECK(std::abs(mean(k) - exact(k)) <= 4.0 * se);
    CHECK(sumsq(k) / n == doctest::Approx(sigma * sigma).epsilon(0.02));
  }
}

TEST_CASE("sigma = 0 reproduces the exact gradient bitwise") {
  auto obj = two_client_quadratic();
  Vec x(2);
  x << -1.0, 2.5;
  RngStream rng = derive_stream(19, "grad", 0, 0);
  Vec g = grad_stochastic(obj, 1, x, 0.0, rng);
  Vec exact = obj.client_grad(1, x);
  CHECK(g(0) == exact(0));
  CHECK(g(1) == exact(1));
}

TEST_CASE("global_metrics reports value, gradient norm, and distance") {
  auto obj = two_client_quadratic();
  Vec x(2);
  x << 2.0, 5.0;
  auto m = global_metrics(obj, x);
  CHECK(m.dist == doctest::Approx(3.0));
  CHECK(m.grad_norm == doctest::Approx(3.0));
  CHECK(m.value == doctest::Approx(obj.value(x)));
}
