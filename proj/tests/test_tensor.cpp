#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "hyperreg/tensor.hpp"
#include "oracles.hpp"

using namespace hyperreg;

TEST_CASE("jay") {
  auto j32 = jay(3, 2);
  CHECK(j32.num_subsets() == 3);
  CHECK(lin_form(j32, j32) == doctest::Approx(6.0));
  CHECK(jay(4, 3).num_subsets() == 4);
  CHECK(jay(3, 3).num_subsets() == 1);
  CHECK_THROWS(jay(2, 3));
  CHECK(j32.at({1, 1}) == 0.0);
  CHECK(j32.at({2, 0}) == 1.0);
}

TEST_CASE("relent scalar") {
  CHECK(relent_scalar(0.37, 0.37) == doctest::Approx(0.0));
  CHECK(relent_scalar(0.2, 1.0) == doctest::Approx(std::log(5.0)));
  CHECK(relent_scalar(0.5, 0.75) ==
        doctest::Approx(0.75 * std::log(1.5) + 0.25 * std::log(0.5)).epsilon(1e-12));
  CHECK_THROWS(relent_scalar(0.0, 0.5));
  CHECK_THROWS(relent_scalar(0.5, 1.5));
}

TEST_CASE("relent scalar convexity grid") {
  for (double p : {0.5, 0.1, 0.01}) {
    double prev_slope = -1e300;
    double prev = relent_scalar(p, 0.0);
    for (int k = 1; k <= 200; ++k) {
      double x = double(k) / 200.0;
      double cur = relent_scalar(p, x);
      double slope = cur - prev;
      CHECK(slope >= prev_slope - 1e-9);
      prev_slope = slope;
      prev = cur;
      if (std::abs(x - p) > 5e-3) CHECK(cur > 0.0);
    }
  }
}

TEST_CASE("quadratic lower bound on relative entropy") {
  // I_p(p+x) >= 0.1 x^2 log(1/p) on the grid; also track the empirical minimum
  double min_ratio = 1e300;
  for (double p : {0.5, 0.1, 0.01, 0.001}) {
    for (int k = 1; k <= 400; ++k) {
      double x = (1.0 - p) * double(k) / 400.0;
      double lhs = relent_scalar(p, p + x);
      double rhs = x * x * std::log(1.0 / p);
      min_ratio = std::min(min_ratio, lhs / rhs);
      CHECK(lhs >= 0.1 * rhs);
    }
  }
  CHECK(min_ratio > 0.1);
}

TEST_CASE("relent tensor") {
  SymTensor q = constant_tensor(4, 2, 0.3);
  CHECK(relent(0.3, q) == doctest::Approx(0.0));
  CHECK(relent(0.25, jay(3, 2)) == doctest::Approx(3.0 * std::log(4.0)));
  auto rq = oracles::random_weight_tensor(6, 2, 17);
  CHECK(relent(0.4, rq) == doctest::Approx(oracles::naive_relent(0.4, rq)).epsilon(1e-12));
  SymTensor bad(3, 2);
  bad.set({0, 1}, 1.5);
  CHECK_THROWS(relent(0.5, bad));
}

TEST_CASE("sampling") {
  auto zero = sample(ErModel::uniform(5, 2, 0.0), 11);
  for (std::size_t i = 0; i < zero.num_subsets(); ++i) CHECK(zero.get_by_rank(i) == 0.0);
  auto full = sample(ErModel::uniform(5, 2, 1.0), 11);
  CHECK(full == jay(5, 2));
  CHECK(sample(ErModel::uniform(8, 2, 0.37), 99) == sample(ErModel::uniform(8, 2, 0.37), 99));
  CHECK(sample(ErModel::uniform(8, 2, 0.37), 99) != sample(ErModel::uniform(8, 2, 0.37), 100));
}

TEST_CASE("sampling mean edge count") {
  // mean edge count over many draws within 3 sigma of p C(n,2)
  int n = 20;
  double p = 0.3;
  long long trials = 10000;
  double total = 0.0;
  for (long long t = 0; t < trials; ++t) {
    auto a = sample(ErModel::uniform(n, 2, p), derive_seed(5, t));
    for (std::size_t i = 0; i < a.num_subsets(); ++i) total += a.get_by_rank(i);
  }
  double nsub = double(binom(n, 2));
  double mean = total / double(trials);
  double sigma = std::sqrt(nsub * p * (1 - p) / double(trials));
  CHECK(std::abs(mean - p * nsub) <= 3.0 * sigma);
}

TEST_CASE("log likelihood ratio") {
  int n = 5;
  double p = 0.3;
  SymTensor qp = constant_tensor(n, 2, p);
  for (std::uint64_t s = 0; s < 5; ++s)
    CHECK(loglik_ratio(sample(ErModel::uniform(n, 2, 0.5), s), qp, p) == doctest::Approx(0.0));
  SymTensor q = constant_tensor(n, 2, 0.6);
  CHECK(loglik_ratio(jay(n, 2), q, p) ==
        doctest::Approx(double(binom(n, 2)) * std::log(0.6 / 0.3)));
  // conflicting pinned entry reports an explicit infinity
  SymTensor qpin = constant_tensor(n, 2, 0.5);
  qpin.set({0, 1}, 0.0);
  CHECK(std::isinf(loglik_ratio(jay(n, 2), qpin, p)));
}

TEST_CASE("tilted mean of W matches the divergence") {
  int n = 6;
  double p = 0.35;
  auto q = oracles::random_weight_tensor(n, 2, 321);
  for (std::size_t i = 0; i < q.num_subsets(); ++i)
    q.set_by_rank(i, 0.05 + 0.9 * q.get_by_rank(i));
  long long trials = 20000;
  double sum = 0.0, sumsq = 0.0;
  for (long long t = 0; t < trials; ++t) {
    double w = loglik_ratio(sample(ErModel::inhomogeneous(q), derive_seed(9, t)), q, p);
    sum += w;
    sumsq += w * w;
  }
  double mean = sum / double(trials);
  double var = sumsq / double(trials) - mean * mean;
  double sigma = std::sqrt(var / double(trials));
  CHECK(std::abs(mean - relent(p, q)) <= 3.5 * sigma);
}

TEST_CASE("lin form") {
  SymTensor z(3, 2);
  z.set({0, 1}, 2.0);
  CHECK(lin_form(z, constant_tensor(3, 2, 0.0)) == 0.0);
  auto a = oracles::random_weight_tensor(4, 3, 7);
  auto b = oracles::random_weight_tensor(4, 3, 8);
  CHECK(lin_form(a, b) == doctest::Approx(oracles::naive_lin_form(a, b)).epsilon(1e-12));
  // pairing with jay is r! times the subset sum
  double subset_sum = 0.0;
  for (std::size_t i = 0; i < a.num_subsets(); ++i) subset_sum += a.get_by_rank(i);
  CHECK(lin_form(a, jay(4, 3)) == doctest::Approx(6.0 * subset_sum));
}

TEST_CASE("dense conversion") {
  auto a = oracles::random_weight_tensor(4, 2, 77);
  auto d = to_dense(a);
  CHECK(d.data[0 * 4 + 1] == a.get({0, 1}));
  CHECK(d.data[1 * 4 + 0] == a.get({0, 1}));
  CHECK(d.data[2 * 4 + 2] == 0.0);
}
