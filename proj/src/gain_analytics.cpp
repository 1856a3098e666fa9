#include "qfel/gain_analytics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>
#include <unsupported/Eigen/MatrixFunctions>

#include "qfel/errors.hpp"

namespace qfel {

namespace {

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw DomainError(fmt::format("{} must be positive, got {}", what, v));
}

// coefficients low to high, monic
cplx poly_eval(const std::vector<double>& c, cplx x) {
  cplx acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

cplx poly_deriv(const std::vector<double>& c, cplx x) {
  cplx acc = 0.0;
  for (std::size_t k = c.size() - 1; k >= 1; --k) acc = acc * x + static_cast<double>(k) * c[k];
  return acc;
}

double scaled_residual(const std::vector<double>& c, const std::vector<cplx>& roots) {
  double worst = 0.0;
  for (const auto& r : roots) {
    double scale = 0.0;
    for (std::size_t k = 0; k < c.size(); ++k) scale += std::abs(c[k]) * std::pow(std::max(1.0, std::abs(r)), static_cast<double>(k));
    worst = std::max(worst, std::abs(poly_eval(c, r)) / std::max(scale, 1e-300));
  }
  return worst;
}

double max_imag(const std::vector<cplx>& roots) {
  double best = 0.0;
  for (const auto& r : roots) best = std::max(best, r.imag());
  return best;
}

cplx newton_step(const std::vector<double>& c, cplx x) {
  const cplx d = poly_deriv(c, x);
  if (std::abs(d) == 0.0) return x;
  const cplx y = x - poly_eval(c, x) / d;
  return std::abs(poly_eval(c, y)) < std::abs(poly_eval(c, x)) ? y : x;
}

// x^2 + b x + c with real coefficients, cancellation free
std::pair<cplx, cplx> real_quadratic(double b, double c) {
  const double disc = b * b - 4.0 * c;
  if (disc >= 0.0) {
    const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
    if (q == 0.0) return {0.0, 0.0};
    return {q, c / q};
  }
  const double im = 0.5 * std::sqrt(-disc);
  return {cplx(-0.5 * b, im), cplx(-0.5 * b, -im)};
}

}  // namespace

DispersionSolution deep_dispersion(double alpha, double kappa) {
  require_positive(alpha, "alpha");
  const double delta = kappa * alpha;
  const double s = 1.0 - 0.25 * kappa * kappa;
  DispersionSolution out;
  out.regime = DispersionRegime::quadratic;
  if (s >= 0.0) {
    const double im = alpha * std::sqrt(s);
    out.roots = {cplx(-0.5 * delta, im), cplx(-0.5 * delta, -im)};
  } else {
    const double re = alpha * std::sqrt(-s);
    out.roots = {cplx(-0.5 * delta + re, 0.0), cplx(-0.5 * delta - re, 0.0)};
  }
  out.im_plus = max_imag(out.roots);
  out.residual = scaled_residual({alpha * alpha, delta, 1.0}, out.roots);
  return out;
}

double third_order_gain(double alpha, double kappa) {
  require_positive(alpha, "alpha");
  if (!(std::abs(kappa) < 2.0)) {
    throw DomainError(fmt::format("third order gain needs |kappa| < 2, got {}", kappa));
  }
  const double s = 1.0 - 0.25 * kappa * kappa;
  const double k2 = kappa * kappa;
  const double first = (0.5 * kappa) / s * alpha / 4.0;
  const double second = (5.0 - 3.0 * k2 + 0.5 * k2 * k2) / (s * s) * alpha * alpha / 32.0;
  return alpha * std::sqrt(s) * (1.0 - first - second);
}

DispersionSolution cubic_dispersion(double alpha, double delta) {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw DomainError(fmt::format("alpha must be nonnegative, got {}", alpha));
  if (!std::isfinite(delta)) throw DomainError("detuning must be finite");
  const double b = 1.0 + delta;
  const std::vector<double> c{-b - 2.0 * alpha * alpha, -1.0, b, 1.0};

  Eigen::Matrix3d companion = Eigen::Matrix3d::Zero();
  companion(0, 0) = -c[2];
  companion(0, 1) = -c[1];
  companion(0, 2) = -c[0];
  companion(1, 0) = 1.0;
  companion(2, 1) = 1.0;
  const Eigen::Vector3cd eig = Eigen::EigenSolver<Eigen::Matrix3d>(companion, false).eigenvalues();

  std::vector<cplx> roots;
  for (Eigen::Index i = 0; i < 3; ++i) roots.push_back(newton_step(c, eig(i)));

  // a real cubic always has one real root; deflating on it keeps the other
  // pair exactly conjugate or exactly real
  const auto real_it = std::min_element(roots.begin(), roots.end(),
                                        [](cplx x, cplx y) { return std::abs(x.imag()) < std::abs(y.imag()); });
  const double r = newton_step(c, cplx(real_it->real(), 0.0)).real();
  const auto [r1, r2] = real_quadratic(c[2] + r, c[1] + r * (c[2] + r));

  DispersionSolution out;
  out.regime = DispersionRegime::cubic;
  out.roots = {cplx(r, 0.0), newton_step(c, r1), newton_step(c, r2)};
  if (out.roots[1].imag() != 0.0) out.roots[2] = std::conj(out.roots[1]);
  std::sort(out.roots.begin(), out.roots.end(), [](cplx x, cplx y) {
    return x.imag() != y.imag() ? x.imag() > y.imag() : x.real() > y.real();
  });
  out.im_plus = max_imag(out.roots);
  out.residual = scaled_residual(c, out.roots);
  return out;
}

double spontaneous_photons(double ell, double kappa) {
  if (!(ell >= 0.0)) throw DomainError(fmt::format("ell must be nonnegative, got {}", ell));
  const double s = 1.0 - 0.25 * kappa * kappa;
  const double x = 0.5 * ell;
  if (std::abs(s) < 1e-8) return x * x * (1.0 + x * x * s / 3.0);
  if (s > 0.0) {
    const double v = std::sinh(x * std::sqrt(s));
    return v * v / s;
  }
  const double v = std::sin(x * std::sqrt(-s));
  return v * v / -s;
}

PhotonStats make_photon_stats(double mean, double variance) {
  PhotonStats out;
  out.mean = mean;
  out.variance = variance;
  if (mean > 0.0) out.fano = variance / mean;
  out.super_poissonian = variance > mean;
  return out;
}

PhotonStats photon_moments(double ell, double kappa, double n0, double var0) {
  if (!(n0 >= 0.0)) throw DomainError(fmt::format("n0 must be nonnegative, got {}", n0));
  if (!(var0 >= 0.0)) throw DomainError(fmt::format("var0 must be nonnegative, got {}", var0));
  const double nsp = spontaneous_photons(ell, kappa);
  const double mean = (nsp + 1.0) * n0 + nsp;
  const double var = (nsp + 1.0) * (nsp + 1.0) * var0 + nsp * (mean + 1.0);
  return make_photon_stats(mean, var);
}

Eigen::Matrix2cd third_order_matrix(double alpha, double kappa) {
  require_positive(alpha, "alpha");
  const double a2 = alpha * alpha;
  const double off = alpha * (1.0 - a2 / 8.0);
  Eigen::Matrix2cd m;
  m << 0.0, -off, off, -alpha * (kappa + 0.5 * alpha - 0.25 * kappa * a2);
  return m;
}

Eigen::Matrix2cd deep_matrix(double alpha, double kappa) {
  require_positive(alpha, "alpha");
  Eigen::Matrix2cd m;
  m << 0.0, -alpha, alpha, -alpha * kappa;
  return m;
}

const char* to_string(PropagatorOrder order) { return order == PropagatorOrder::deep ? "deep" : "third"; }

double ParametricPropagator::bogoliubov_defect() const {
  return std::norm(u_aa()) - std::norm(u_ay()) - 1.0;
}

double ParametricPropagator::mean_photons(double n0) const { return std::norm(u_aa()) * n0 + std::norm(u_ay()); }

ParametricPropagator parametric_propagator(PropagatorOrder order, double alpha, double kappa, double tau) {
  if (!(tau >= 0.0)) throw DomainError(fmt::format("tau must be nonnegative, got {}", tau));
  const Eigen::Matrix2cd m = order == PropagatorOrder::deep ? deep_matrix(alpha, kappa) : third_order_matrix(alpha, kappa);
  ParametricPropagator out;
  out.order = order;
  out.tau = tau;
  // Pade scaling and squaring; stays accurate at the defective point |kappa| = 2
  out.u = (cplx(0.0, -tau) * m).exp();
  return out;
}

double gain_length_ratio(double alpha) {
  require_positive(alpha, "alpha");
  return std::sqrt(3.0) / std::cbrt(16.0) / std::cbrt(alpha);
}

GainScale gain_scales(const PhysicalParams& phys, int n_electrons) {
  require_positive(phys.g, "g");
  require_positive(phys.omega_r, "omega_r");
  require_positive(phys.q, "q");
  require_positive(phys.c, "c");
  if (n_electrons < 1) throw DomainError(fmt::format("electron number must be positive, got {}", n_electrons));
  const double n = static_cast<double>(n_electrons);
  GainScale out;
  out.omega_r = phys.omega_r;
  out.alpha_n = phys.g / phys.omega_r * std::sqrt(n);
  out.l_g = phys.c / (2.0 * phys.g * std::sqrt(n));
  out.l_g_classical = phys.c / (std::sqrt(3.0) * std::cbrt(0.5 * phys.g * phys.g * n * phys.omega_r));
  out.ratio = out.l_g / out.l_g_classical;
  out.bandwidth = 2.0 * out.alpha_n * phys.q;
  return out;
}

MomentumAxis momentum_axis(double p_over_q, double alpha) {
  require_positive(alpha, "alpha");
  const double delta = 2.0 * p_over_q - 1.0;
  return MomentumAxis{p_over_q, delta, delta / alpha};
}

MomentumAxis momentum_axis_from_kappa(double kappa, double alpha) {
  require_positive(alpha, "alpha");
  const double delta = kappa * alpha;
  return MomentumAxis{0.5 * (delta + 1.0), delta, kappa};
}

}  // namespace qfel
