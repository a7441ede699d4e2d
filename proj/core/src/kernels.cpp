#include "medflow/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "medflow/domain.hpp"

namespace medflow {

KernelSpec KernelSpec::annulus(double kappa, double r) {
  if (!(kappa >= 0.0 && kappa < 1.0)) throw AdmissibilityError("annulus requires 0 <= kappa < 1");
  return {Shape::Annulus, r, kappa, nullptr, nullptr};
}

KernelSpec KernelSpec::shrinking(double r, RadialFn schedule) {
  KernelSpec s{Shape::ShrinkingAnnulus, r, 0.0, std::move(schedule), nullptr};
  if (!s.kappa_of_r) s.kappa_of_r = [](double rr) { return 1.0 - std::sqrt(rr); };
  return s;
}

KernelSpec KernelSpec::radial_weight(RadialFn k, double r) {
  return {Shape::RadialWeight, r, 0.0, nullptr, std::move(k)};
}

double KernelSpec::kappa_at_r() const {
  switch (shape) {
    case Shape::Ball:
      return 0.0;
    case Shape::Annulus:
      return kappa;
    case Shape::ShrinkingAnnulus: {
      double k = kappa_of_r(r);
      if (!(k >= 0.0 && k < 1.0))
        throw AdmissibilityError("shrinking-annulus schedule left [0,1)");
      return k;
    }
    case Shape::RadialWeight:
      return 0.0;
  }
  return 0.0;
}

namespace {

// adaptive Simpson on [a,b]
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  if (depth <= 0 || std::fabs(left + right - whole) <= 15.0 * tol)
    return left + right + (left + right - whole) / 15.0;
  return simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double rel_tol) {
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double scale = std::max(std::fabs(whole), 1e-300);
  return simpson(f, a, b, fa, fm, fb, whole, rel_tol * scale, 48);
}

// effective support radius: smallest R with negligible tail of K(rho)rho^(d+1)
double support_radius(const RadialFn& k, int d) {
  double total = 0.0, R = 1.0;
  auto f = [&](double rho) { return k(rho) * std::pow(rho, d + 1); };
  total = integrate(f, 0.0, R, 1e-10);
  for (int iter = 0; iter < 64; ++iter) {
    double tail = integrate(f, R, 2.0 * R, 1e-10);
    if (!(std::isfinite(tail))) throw AdmissibilityError("kernel moment integral diverges");
    if (std::fabs(tail) <= 1e-13 * std::max(std::fabs(total), 1e-300)) return 2.0 * R;
    total += tail;
    R *= 2.0;
    if (R > 1e9) throw AdmissibilityError("kernel second moment does not converge");
  }
  return R;
}

double annulus_c_A(int d, double kap) {
  const double base = 1.0 / (2.0 * (d + 1));
  if (kap == 0.0) return base;
  return base * (1.0 - std::pow(kap, d + 1)) / (1.0 - std::pow(kap, d - 1));
}

}  // namespace

KernelMoments moments(const KernelSpec& spec, int d) {
  if (d < 2) throw AdmissibilityError("moments requires d >= 2");
  KernelMoments m;
  m.omega_d = unit_ball_volume(d);
  const double w_dm1 = unit_ball_volume(d - 1);

  switch (spec.shape) {
    case KernelSpec::Shape::Ball:
    case KernelSpec::Shape::Annulus:
    case KernelSpec::Shape::ShrinkingAnnulus: {
      const double kap = spec.kappa_at_r();
      const double vol_ratio = 1.0 - std::pow(kap, d);  // annulus mass / ball mass
      m.k2 = (1.0 / (d + 2)) * (1.0 - std::pow(kap, d + 2)) / vol_ratio;
      m.k1 = (2.0 * w_dm1 / ((d + 1) * m.omega_d)) * (1.0 - std::pow(kap, d + 1)) / vol_ratio;
      if (spec.shape == KernelSpec::Shape::ShrinkingAnnulus) {
        // the sphere limit of the consistency constant
        m.c_A = 1.0 / (2.0 * (d - 1));
      } else {
        m.c_A = annulus_c_A(d, kap);
      }
      break;
    }
    case KernelSpec::Shape::RadialWeight: {
      const RadialFn& k = spec.radial;
      if (!k) throw AdmissibilityError("radial-weight kernel has no profile");
      auto adm = admissible(k, d);
      if (!adm.ok) throw AdmissibilityError("kernel not admissible: " + adm.clause);
      const double R = support_radius(k, d);
      auto mom = [&](int p) {
        return integrate([&](double rho) { return k(rho) * std::pow(rho, p); }, 0.0, R, 1e-10);
      };
      const double m_dm1 = mom(d - 1);
      m.k2 = (1.0 / d) * mom(d + 1) / m_dm1;
      m.k1 = (2.0 * w_dm1 / (d * m.omega_d)) * mom(d) / m_dm1;
      // c_A generalizes the paper's ball/annulus constants: half the mean x1^2
      // moment of the kernel's (d-1)-dimensional cross-section. Reproduces
      // 1/(2(d+1)) for the ball and the annulus closed form exactly.
      const double sec = mom(d) / ((d - 1.0) * mom(d - 2));
      m.c_A = 0.5 * sec;
      break;
    }
  }
  if (!(m.c_A > 0.0 && std::isfinite(m.c_A) && m.k1 > 0.0 && std::isfinite(m.k1) && m.k2 > 0.0 &&
        std::isfinite(m.k2)))
    throw AdmissibilityError("derived kernel constants are not positive finite");
  return m;
}

Admissibility admissible(const RadialFn& k, int d) {
  const double k0 = k(0.0);
  if (!(k0 > 0.0) || !std::isfinite(k0)) return {false, "positive at zero"};
  if (std::fabs(k(1e-9) - k0) > 1e-3 * std::max(1.0, std::fabs(k0)))
    return {false, "continuous at zero"};

  // monotonicity on a geometric grid
  double prev = k0;
  for (double rho = 1e-6; rho <= 1e4; rho *= 1.25) {
    const double v = k(rho);
    if (!(v >= -0.0) || !std::isfinite(v)) return {false, "nonnegative and finite"};
    if (v > prev * (1.0 + 1e-9) + 1e-300) return {false, "non-increasing"};
    prev = v;
  }

  // tail of the (d+1)-th moment: partial sums over dyadic blocks must be
  // Cauchy at 1e-8
  auto f = [&](double rho) { return k(rho) * std::pow(rho, d + 1); };
  double total = integrate(f, 0.0, 1.0, 1e-9);
  double lo = 1.0;
  bool converged = false;
  for (int b = 0; b < 48; ++b) {
    const double inc = integrate(f, lo, 2.0 * lo, 1e-9);
    total += inc;
    lo *= 2.0;
    if (inc <= 1e-8 * std::max(total, 1e-300) && inc <= 1e-8) {
      converged = true;
      break;
    }
  }
  if (!converged || !std::isfinite(total)) return {false, "second moment"};
  return {true, ""};
}

}  // namespace medflow
