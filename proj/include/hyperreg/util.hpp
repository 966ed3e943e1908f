#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace hyperreg {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Per-trial derived seeds; results do not depend on how trials are batched.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

inline double int_pow(double x, long long k) {
  if (k < 0) return 1.0 / int_pow(x, -k);
  double r = 1.0;
  while (k > 0) {
    if (k & 1) r *= x;
    x *= x;
    k >>= 1;
  }
  return r;
}

inline long long binom(long long n, long long k) {
  if (k < 0 || k > n) return 0;
  k = std::min(k, n - k);
  long long r = 1;
  for (long long i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

inline double falling_factorial(long long n, long long k) {
  double r = 1.0;
  for (long long i = 0; i < k; ++i) r *= double(n - i);
  return r;
}

// Running compensated sum (Kahan); entropy sums accumulate many small terms.
struct KahanSum {
  double sum = 0.0;
  double c = 0.0;
  void add(double x) {
    double y = x - c;
    double t = sum + y;
    c = (t - sum) - y;
    sum = t;
  }
  double value() const { return sum; }
};

struct WilsonInterval {
  double lo = 0.0;
  double hi = 1.0;
};

inline WilsonInterval wilson_interval(long long hits, long long trials, double z = 1.959963984540054) {
  if (trials <= 0) return {0.0, 1.0};
  double n = double(trials);
  double ph = double(hits) / n;
  double z2 = z * z;
  double denom = 1.0 + z2 / n;
  double center = (ph + z2 / (2 * n)) / denom;
  double rad = z * std::sqrt(ph * (1 - ph) / n + z2 / (4 * n * n)) / denom;
  return {std::max(0.0, center - rad), std::min(1.0, center + rad)};
}

// Exact rational on int64, used where the contract demands zero-tolerance values.
struct Rational {
  long long num = 0;
  long long den = 1;

  Rational() = default;
  Rational(long long n) : num(n), den(1) {}
  Rational(long long n, long long d) : num(n), den(d) { normalize(); }

  void normalize() {
    if (den == 0) throw std::invalid_argument("rational: zero denominator");
    if (den < 0) {
      num = -num;
      den = -den;
    }
    long long g = gcd_ll(num < 0 ? -num : num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }

  static long long gcd_ll(long long a, long long b) {
    while (b != 0) {
      long long t = a % b;
      a = b;
      b = t;
    }
    return a < 0 ? -a : a;
  }

  double to_double() const { return double(num) / double(den); }

  std::string str() const {
    if (den == 1) return std::to_string(num);
    return std::to_string(num) + "/" + std::to_string(den);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den + b.num * a.den, a.den * b.den);
  }
  friend Rational operator-(const Rational& a, const Rational& b) {
    return Rational(a.num * b.den - b.num * a.den, a.den * b.den);
  }
  friend Rational operator*(const Rational& a, const Rational& b) {
    return Rational(a.num * b.num, a.den * b.den);
  }
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num == b.num && a.den == b.den;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b) {
    return a.num * b.den < b.num * a.den;
  }
  friend bool operator<=(const Rational& a, const Rational& b) {
    return a.num * b.den <= b.num * a.den;
  }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return b <= a; }
};

// I_p(x) = x log(x/p) + (1-x) log((1-x)/(1-p)), extended continuously to [0,1].
inline double relent_scalar(double p, double x) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("relent_scalar: p must lie in (0,1)");
  if (x > 1.0 && x <= 1.0 + 1e-9) x = 1.0;  // float drift at the boundary
  if (x < 0.0 && x >= -1e-9) x = 0.0;
  if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("relent_scalar: x must lie in [0,1]");
  double a = (x > 0.0) ? x * std::log(x / p) : 0.0;
  double b = (x < 1.0) ? (1.0 - x) * std::log((1.0 - x) / (1.0 - p)) : 0.0;
  double v = a + b;
  return v > 0.0 ? v : 0.0;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(splitmix64(seed)) {}

  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(eng_); }
  bool bernoulli(double p) { return uniform() < p; }
  std::uint64_t next_u64() { return eng_(); }
  // uniform integer in [0, n)
  std::size_t index(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(eng_);
  }
  std::mt19937_64& engine() { return eng_; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace hyperreg
