#include "medflow/medians.hpp"

#include <algorithm>
#include <cmath>

#include "medflow/rng.hpp"

namespace medflow {

namespace {

// insertion sort for tiny ranges
void small_sort(double* a, std::size_t n) {
  for (std::size_t i = 1; i < n; ++i) {
    double v = a[i];
    std::size_t j = i;
    while (j > 0 && a[j - 1] > v) {
      a[j] = a[j - 1];
      --j;
    }
    a[j] = v;
  }
}

double median5(double* a, std::size_t n) {
  small_sort(a, n);
  return a[(n - 1) / 2];
}

// median-of-medians pivot value; uses the tail of the buffer as group-median
// storage, so it is O(1) extra space over the recursion
double mom_pivot(double* a, std::size_t n) {
  std::size_t ng = 0;
  for (std::size_t i = 0; i < n; i += 5) {
    const std::size_t len = std::min<std::size_t>(5, n - i);
    double g[5];
    std::copy(a + i, a + i + len, g);
    const double med = median5(g, len);
    a[ng++] = med;  // groups already consumed; reuse prefix
  }
  if (ng == 1) return a[0];
  // recurse on the ng medians
  std::size_t k = (ng + 1) / 2;
  return kth_smallest({a, ng}, k);
}

struct SelectRng {
  std::uint64_t s;
  explicit SelectRng(std::uint64_t seed) : s(seed ^ 0x9e3779b97f4a7c15ull) {}
  std::uint64_t next() {
    s += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = s;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }
};

}  // namespace

double kth_smallest(std::span<double> scratch, std::size_t k) {
  double* a = scratch.data();
  std::size_t n = scratch.size();
  if (k < 1 || k > n) throw Error(errc::median, "k out of range in kth_smallest");

  if (n <= 32) {
    small_sort(a, n);
    return a[k - 1];
  }

  SelectRng rng(n * 0x100000001b3ull + k);
  int rounds_left = 2 * static_cast<int>(std::ceil(std::log2(static_cast<double>(n))));
  for (;;) {
    if (n <= 32) {
      small_sort(a, n);
      return a[k - 1];
    }
    double pivot;
    if (rounds_left-- > 0) {
      pivot = a[rng.next() % n];
    } else {
      // guarantee linear worst case; mom_pivot permutes the prefix, which a
      // value-based partition tolerates
      std::vector<double> copy(a, a + n);
      pivot = mom_pivot(copy.data(), n);
    }
    // three-way partition around the pivot value
    std::size_t lt = 0, i = 0, gt = n;
    while (i < gt) {
      if (a[i] < pivot) {
        std::swap(a[lt++], a[i++]);
      } else if (a[i] > pivot) {
        std::swap(a[i], a[--gt]);
      } else {
        ++i;
      }
    }
    if (k <= lt) {
      n = lt;
    } else if (k > gt) {
      a += gt;
      k -= gt;
      n -= gt;
    } else {
      return pivot;
    }
  }
}

// The defining inequality p <= (1/n) sum sign(m - v_i), evaluated just above
// the c-th order statistic, reads 2c - n >= p*n. The selected rank is the
// smallest such c; computing the threshold as p*n keeps the floating-point
// comparison identical to a literal inequality scan.
std::size_t p_median_rank(std::size_t n, double p) {
  const double dn = static_cast<double>(n);
  const double rank = std::ceil(0.5 * (p * dn + dn));
  if (rank < 1.0) return 1;
  if (rank > dn) return n;
  return static_cast<std::size_t>(rank);
}

std::optional<double> p_median(std::span<const double> values, double p,
                               std::vector<double>& scratch) {
  const std::size_t n = values.size();
  if (n == 0) return std::nullopt;
  scratch.assign(values.begin(), values.end());
  return kth_smallest(scratch, p_median_rank(n, p));
}

std::optional<double> discrete_median(std::span<const double> values,
                                      std::vector<double>& scratch) {
  return p_median(values, 0.0, scratch);
}

std::optional<double> weighted_median(std::span<const double> values,
                                      std::span<const double> weights, double p) {
  const std::size_t n = values.size();
  if (n == 0) return std::nullopt;
  if (weights.size() != n) throw Error(errc::median, "weights length mismatch");

  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] < 0.0) throw DegenerateWeightsError("negative weight");
    total += weights[i];
  }
  if (!(total > 0.0)) throw DegenerateWeightsError("weights sum to zero");

  // the cutoff semantics: p = +-1 is the supremum/infimum of the support
  if (p <= -1.0 || p >= 1.0) {
    bool found = false;
    double ext = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (weights[i] == 0.0) continue;
      if (!found || (p >= 1.0 ? values[i] > ext : values[i] < ext)) ext = values[i];
      found = true;
    }
    return ext;
  }

  // order the values and advance until the defining inequality holds
  static thread_local std::vector<std::uint32_t> idx;
  idx.resize(n);
  for (std::uint32_t i = 0; i < static_cast<std::uint32_t>(n); ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
    return values[a] < values[b] || (values[a] == values[b] && a < b);
  });

  const double target = 0.5 * (p * total + total);
  double cum = 0.0;
  double last_positive = values[idx[0]];
  for (std::size_t j = 0; j < n; ++j) {
    const double w = weights[idx[j]];
    if (w == 0.0) continue;  // zero-mass values never satisfy the inequalities
    cum += w;
    last_positive = values[idx[j]];
    if (cum >= target) return values[idx[j]];
  }
  return last_positive;  // rounding fell just short of the total mass
}

std::optional<double> median_of(const MedianQuery& q, std::vector<double>& scratch) {
  if (!q.weights.empty()) return weighted_median(q.values, q.weights, q.p);
  return p_median(q.values, q.p, scratch);
}

McMedian continuous_median_mc(const ScalarField& phi, std::span<const double> center,
                              const KernelSpec& spec, int d, std::size_t mc_nodes,
                              std::uint64_t seed) {
  if (mc_nodes < 1) throw Error(errc::median, "mc_nodes must be positive");
  Rng rng(seed);
  const double r = spec.r;

  // radial inverse-CDF; indicator stencils have the closed form, radial
  // weights get a tabulated CDF of K(rho) rho^(d-1)
  std::vector<double> cdf;         // RadialWeight only
  double rmax = r;
  double kappa_d = 0.0;
  if (spec.is_indicator()) {
    kappa_d = std::pow(spec.kappa_at_r(), d);
  } else {
    const double scale = 1.0;  // K evaluated on rho/r
    (void)scale;
    const int knots = 8192;
    // support scan: find R with negligible tail of K(rho)rho^(d-1)
    double R = 1.0;
    {
      double prev = -1.0, total = 0.0;
      for (int it = 0; it < 40; ++it) {
        total = 0.0;
        const int m = 4096;
        for (int i = 0; i < m; ++i) {
          const double rho = (i + 0.5) / m * R;
          total += spec.radial(rho) * std::pow(rho, d - 1);
        }
        total *= R / m;
        if (prev >= 0.0 && total - prev <= 1e-10 * std::max(total, 1e-300)) break;
        prev = total;
        R *= 2.0;
      }
    }
    rmax = R * r;
    cdf.resize(knots + 1);
    cdf[0] = 0.0;
    for (int i = 0; i < knots; ++i) {
      const double rho = (i + 0.5) / knots * R;
      cdf[i + 1] = cdf[i] + spec.radial(rho) * std::pow(rho, d - 1);
    }
    for (auto& v : cdf) v /= cdf.back();
  }

  std::vector<double> samples(mc_nodes);
  std::vector<double> x(d);
  std::vector<double> dir(d);
  for (std::size_t s = 0; s < mc_nodes; ++s) {
    double rho;
    if (spec.is_indicator()) {
      const double u = rng.uniform();
      rho = r * std::pow(kappa_d + u * (1.0 - kappa_d), 1.0 / d);
    } else {
      const double u = rng.uniform();
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      const std::size_t j = std::max<std::size_t>(1, it - cdf.begin());
      const double t = (u - cdf[j - 1]) / std::max(cdf[j] - cdf[j - 1], 1e-300);
      rho = rmax * (static_cast<double>(j - 1) + t) / static_cast<double>(cdf.size() - 1);
    }
    // uniform direction via normalized gaussians
    double norm2 = 0.0;
    for (int i = 0; i < d; ++i) {
      dir[i] = rng.normal();
      norm2 += dir[i] * dir[i];
    }
    const double inv = 1.0 / std::sqrt(std::max(norm2, 1e-300));
    for (int i = 0; i < d; ++i) x[i] = center[i] + rho * dir[i] * inv;
    samples[s] = phi(x);
  }

  McMedian out;
  out.nodes = mc_nodes;
  out.level = 0.05;
  std::vector<double> scratch = samples;
  const std::size_t k = (mc_nodes + 1) / 2;
  out.value = kth_smallest(scratch, k);

  const double eps = std::sqrt(std::log(2.0 / out.level) / (2.0 * mc_nodes));
  const std::size_t k_lo = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(mc_nodes * (0.5 - eps))));
  const std::size_t k_hi = std::min<std::size_t>(
      mc_nodes, static_cast<std::size_t>(std::ceil(mc_nodes * (0.5 + eps))));
  scratch = samples;
  const double lo = kth_smallest(scratch, k_lo);
  scratch = samples;
  const double hi = kth_smallest(scratch, k_hi);
  out.envelope = 0.5 * (hi - lo);
  return out;
}

}  // namespace medflow
