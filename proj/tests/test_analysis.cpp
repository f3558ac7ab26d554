#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "fedsim/analysis.hpp"
#include "fedsim/errors.hpp"

using namespace fedsim;

TEST_CASE("mixing matrix examples") {
  SUBCASE("two of three active") {
    Mat w = mixing_matrix({0, {0, 1}}, 3);
    Mat expected(3, 3);
    expected << 0.5, 0.5, 0.0, 0.5, 0.5, 0.0, 0.0, 0.0, 1.0;
    CHECK((w - expected).norm() <= 1e-15);
  }
  SUBCASE("empty and singleton sets give the identity") {
    CHECK((mixing_matrix({0, {}}, 4) - Mat::Identity(4, 4)).norm() == 0.0);
    CHECK((mixing_matrix({0, {2}}, 4) - Mat::Identity(4, 4)).norm() == 0.0);
  }
  SUBCASE("doubly stochastic and idempotent") {
    Mat w = mixing_matrix({0, {1, 2, 4}}, 5);
    CHECK((w * Vec::Ones(5) - Vec::Ones(5)).norm() <= 1e-14);
    CHECK((w.transpose() - w).norm() == 0.0);
    CHECK((w * w - w).norm() <= 1e-14);
  }
}

TEST_CASE("expected W^2 closed cases for m = 2") {
  SUBCASE("always both active") {
    Mat m2 = expected_w2_exact({1.0, 1.0});
    Mat expected(2, 2);
    expected << 0.5, 0.5, 0.5, 0.5;
    CHECK((m2 - expected).norm() <= 1e-15);
  }
  SUBCASE("independent fair coins") {
    // Both active w.p. 0.25 -> averaging matrix; otherwise identity.
    Mat m2 = expected_w2_exact({0.5, 0.5});
    Mat expected(2, 2);
    expected << 0.875, 0.125, 0.125, 0.875;
    CHECK((m2 - expected).norm() <= 1e-14);
  }
}

TEST_CASE("monte carlo matches exact enumeration") {
  std::vector<double> p{0.3, 0.8, 0.5, 0.6};
  Mat exact = expected_w2_exact(p);
  RngStream rng = derive_stream(5, "mc", 0, 0);
  const int n = 200000;
  Mat mc = expected_w2_mc(p, n, rng);
  // Each entry is a mean of values in [0, 1]; 5 SE with SE <= 0.5/sqrt(n).
  double tol = 5.0 * 0.5 / std::sqrt(static_cast<double>(n));
  CHECK((mc - exact).cwiseAbs().maxCoeff() <= tol);
}

TEST_CASE("k-of-m closed form matches monte carlo") {
  const int m = 6, k = 3;
  Mat exact = expected_w2_exact_kofm(m, k);
  RngStream rng = derive_stream(7, "mc", 0, 0);
  Mat mc = expected_w2_mc_kofm(m, k, 100000, rng);
  CHECK((mc - exact).cwiseAbs().maxCoeff() <= 0.01);
  // Row sums must be exactly one by double stochasticity.
  CHECK((exact * Vec::Ones(m) - Vec::Ones(m)).norm() <= 1e-12);
}

TEST_CASE("k = 1 sampling never mixes") {
  CHECK((expected_w2_exact_kofm(5, 1) - Mat::Identity(5, 5)).norm() == 0.0);
  CHECK(rho_of(expected_w2_exact_kofm(5, 1)) == doctest::Approx(1.0));
}

TEST_CASE("second eigenvalue examples") {
  CHECK(rho_of(Mat::Identity(4, 4)) == doctest::Approx(1.0));
  CHECK(rho_of(Mat::Constant(4, 4, 0.25)) == doctest::Approx(0.0).epsilon(1e-12));
  Mat w(2, 2);
  w << 0.875, 0.125, 0.125, 0.875;
  CHECK(rho_of(w) == doctest::Approx(0.75));
  Mat asym(2, 2);
  asym << 0.9, 0.1, 0.2, 0.8;
  CHECK_THROWS_AS(rho_of(asym), ConfigError);
}

TEST_CASE("ergodicity bound on a fair two-client system") {
  auto report = ergodicity_check({0.5, 0.5});
  CHECK(report.rho == doctest::Approx(0.75));
  // c = 0.5, 1 - (1-c)^m = 0.75: bound = 1 - 0.5^4 * 0.75^2 / 8.
  CHECK(report.bound_general == doctest::Approx(1.0 - 0.0625 * 0.5625 / 8.0));
  CHECK(report.within_bound);
}

TEST_CASE("ergodicity bound holds on random instances") {
  RngStream rng = derive_stream(9, "p", 0, 0);
  for (int trial = 0; trial < 100; ++trial) {
    int m = 2 + static_cast<int>(rng.uniform_below(9));
    std::vector<double> p(m);
    for (double& v : p) v = 0.2 + 0.8 * rng.uniform();
    auto report = ergodicity_check(p);
    CHECK(report.rho < 1.0);
    CHECK(report.within_bound);
  }
}

TEST_CASE("uniform k-of-m bound holds for k >= 2") {
  for (int k : {2, 4, 7, 10}) {
    auto report = ergodicity_check_kofm(10, k);
    REQUIRE(report.bound_uniform_k.has_value());
    CHECK(*report.bound_uniform_k ==
          doctest::Approx(1.0 - (k / 10.0) * (k / 10.0) / 8.0));
    CHECK(report.rho <= *report.bound_uniform_k + 1e-12);
  }
}

TEST_CASE("inclusion weight worked example") {
  // m = 2, p = (0.5, 0.5): E[X_1 / (X_1 + X_2)] = 0.25*1 + 0.25*0.5 = 0.375.
  std::vector<double> p{0.5, 0.5};
  CHECK(inclusion_weight_oracle(p, 0) == doctest::Approx(0.375));
  CHECK(inclusion_weight_closedform(p, 0) == doctest::Approx(0.375));
  CHECK(inclusion_weight_exact_dp(p, 0) == doctest::Approx(0.375));
}

TEST_CASE("three inclusion-weight routes agree on random instances") {
  RngStream rng = derive_stream(11, "p", 0, 0);
  for (int trial = 0; trial < 50; ++trial) {
    int m = 2 + static_cast<int>(rng.uniform_below(7));
    std::vector<double> p(m);
    for (double& v : p) v = rng.uniform_pos();
    for (int i = 0; i < m; ++i) {
      double oracle = inclusion_weight_oracle(p, i);  // cross-checks closedform
      CHECK(inclusion_weight_exact_dp(p, i) == doctest::Approx(oracle).epsilon(1e-10));
    }
  }
}

TEST_CASE("dp route survives certain activations") {
  std::vector<double> p{1.0, 0.5, 1.0};
  for (int i = 0; i < 3; ++i)
    CHECK(inclusion_weight_exact_dp(p, i) ==
          doctest::Approx(inclusion_weight_oracle(p, i)).epsilon(1e-12));
}

TEST_CASE("bias limit for a single client is its own optimum") {
  Vec u(2);
  u << 3.0, -1.0;
  Vec b = fedavg_bias_closedform({0.7}, {u});
  CHECK((b - u).norm() <= 1e-14);
}

TEST_CASE("uniform probabilities leave the limit unbiased") {
  std::vector<Vec> u;
  for (double v : {1.0, 5.0, -3.0}) {
    Vec x(1);
    x << v;
    u.push_back(x);
  }
  Vec b = fedavg_bias_closedform({0.4, 0.4, 0.4}, u);
  CHECK(b(0) == doctest::Approx(1.0));  // mean of the optima
}

TEST_CASE("two-client heterogeneous bias curve") {
  // u = (0, 100), p_1 = 0.5: the limit is 150 * p_2 / (p_2 + 1).
  Vec u0(1), u1(1);
  u0 << 0.0;
  u1 << 100.0;
  for (double p2 : {0.1, 0.5, 0.9}) {
    Vec b = fedavg_bias_closedform({0.5, p2}, {u0, u1});
    CHECK(b(0) == doctest::Approx(150.0 * p2 / (p2 + 1.0)).epsilon(1e-12));
  }
}

TEST_CASE("closed form and dp bias evaluators agree") {
  RngStream rng = derive_stream(13, "p", 0, 0);
  for (int trial = 0; trial < 20; ++trial) {
    int m = 2 + static_cast<int>(rng.uniform_below(8));
    std::vector<double> p(m);
    std::vector<Vec> u;
    for (int i = 0; i < m; ++i) {
      p[i] = rng.uniform_pos();
      Vec x(2);
      x << rng.normal(), rng.normal();
      u.push_back(x);
    }
    Vec a = fedavg_bias_closedform(p, u);
    Vec b = fedavg_bias_exact(p, u);
    CHECK((a - b).norm() <= 1e-10);
  }
}

TEST_CASE("all-zero probabilities are rejected") {
  Vec u(1);
  u << 1.0;
  CHECK_THROWS_AS(fedavg_bias_closedform({0.0}, {u}), ConfigError);
}

TEST_CASE("consensus error") {
  Vec a(1), b(1), c(1);
  a << 0.0;
  b << 2.0;
  c << 4.0;
  // xbar = 2; mean squared deviation = (4 + 0 + 4) / 3.
  CHECK(consensus_error({a, b, c}) == doctest::Approx(8.0 / 3.0));
  CHECK(consensus_error({a, a, a}) == doctest::Approx(0.0));
}
