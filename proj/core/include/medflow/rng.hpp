#pragma once

// Seeded randomness and low-discrepancy sequences. All draws go through
// explicit conversions (never std:: distributions), so identical seeds give
// bit-identical streams on every platform supported by std::mt19937_64.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace medflow {

class Rng {
public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // uniform in [0,1)
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  // index in [0, n)
  std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

  // standard normal via Box-Muller
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double m = std::sqrt(-2.0 * std::log(u1));
    spare_ = m * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return m * std::cos(2.0 * M_PI * u2);
  }

  // exact Poisson count; splits large means so Knuth's product never underflows
  long poisson(double lambda) {
    if (lambda <= 0.0) return 0;
    long total = 0;
    while (lambda > 30.0) {
      total += poisson_knuth(30.0);
      lambda -= 30.0;
    }
    return total + poisson_knuth(lambda);
  }

private:
  long poisson_knuth(double lambda) {
    const double limit = std::exp(-lambda);
    long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Van der Corput radical inverse; bases 2,3,5,... give the Halton sequence.
inline double radical_inverse(std::uint64_t i, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double x = 0.0;
  while (i > 0) {
    x += static_cast<double>(i % base) * f;
    i /= base;
    f *= inv;
  }
  return x;
}

// Deterministic quasi-Monte Carlo nodes in the unit ball of dimension d,
// flattened as count*d. Radius uses the u^(1/d) volume map; the direction
// comes from the polar map (d=2) or the cylindrical-equal-area map (d=3).
std::vector<double> qmc_unit_ball(int d, std::size_t count);

inline std::vector<double> qmc_unit_ball(int d, std::size_t count) {
  static const std::uint64_t bases[] = {2, 3, 5, 7};
  std::vector<double> out(count * static_cast<std::size_t>(d));
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t k = i + 1;
    double* p = out.data() + i * d;
    if (d == 2) {
      double rho = std::sqrt(radical_inverse(k, bases[0]));
      double th = 2.0 * M_PI * radical_inverse(k, bases[1]);
      p[0] = rho * std::cos(th);
      p[1] = rho * std::sin(th);
    } else if (d == 3) {
      double rho = std::cbrt(radical_inverse(k, bases[0]));
      double z = 1.0 - 2.0 * radical_inverse(k, bases[1]);
      double th = 2.0 * M_PI * radical_inverse(k, bases[2]);
      double s = std::sqrt(std::max(0.0, 1.0 - z * z));
      p[0] = rho * s * std::cos(th);
      p[1] = rho * s * std::sin(th);
      p[2] = rho * z;
    } else {
      // low-dimensional quadrature only; higher d has no caller
      throw std::invalid_argument("qmc_unit_ball supports d=2,3");
    }
  }
  return out;
}

}  // namespace medflow
