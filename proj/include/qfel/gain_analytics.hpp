#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "qfel/model_params.hpp"

namespace qfel {

using cplx = std::complex<double>;

enum class DispersionRegime { quadratic, cubic };

struct DispersionSolution {
  std::vector<cplx> roots;
  // max(0, max Im lambda)
  double im_plus = 0.0;
  DispersionRegime regime = DispersionRegime::quadratic;
  // largest |p(lambda)| / sum_k |c_k| max(1, |lambda|)^k over the roots
  double residual = 0.0;
};

/// Two-level parametric amplifier: lambda = -Delta/2 +- i alpha sqrt(1 - kappa^2/4).
DispersionSolution deep_dispersion(double alpha, double kappa);

/// Im lambda+ with the first and second order corrections in alpha.
/// Throws DomainError for |kappa| >= 2.
double third_order_gain(double alpha, double kappa);

/// Roots of (lambda^2 - 1)(lambda + 1 + Delta) - 2 alpha^2.
DispersionSolution cubic_dispersion(double alpha, double delta);

/// Vacuum-seeded photon number at length ell = L/L_g. Outside the band
/// |kappa| > 2 this is the oscillatory continuation.
double spontaneous_photons(double ell, double kappa);

struct PhotonStats {
  double mean = 0.0;
  double variance = 0.0;
  std::optional<double> fano;
  bool super_poissonian = false;
};

PhotonStats make_photon_stats(double mean, double variance);

/// Moments after amplification of a seed with mean n0 and variance var0.
PhotonStats photon_moments(double ell, double kappa, double n0, double var0);

/// Linearized coupling of (Y_10, a) including the alpha^2 and alpha^3 terms.
Eigen::Matrix2cd third_order_matrix(double alpha, double kappa);
/// Same with the corrections dropped.
Eigen::Matrix2cd deep_matrix(double alpha, double kappa);

enum class PropagatorOrder { deep, third };

const char* to_string(PropagatorOrder order);

struct ParametricPropagator {
  PropagatorOrder order = PropagatorOrder::deep;
  double tau = 0.0;
  // acts on coefficient vectors ordered (Y_10, a)
  Eigen::Matrix2cd u = Eigen::Matrix2cd::Identity();

  cplx u_aa() const { return u(1, 1); }
  cplx u_ay() const { return u(1, 0); }
  // |U_aa|^2 - |U_aY|^2 - 1
  double bogoliubov_defect() const;
  double mean_photons(double n0) const;
};

ParametricPropagator parametric_propagator(PropagatorOrder order, double alpha, double kappa, double tau);

struct GainScale {
  double l_g = 0.0;
  double l_g_classical = 0.0;
  double ratio = 0.0;
  double bandwidth = 0.0;
  double omega_r = 0.0;
  double alpha_n = 0.0;
};

/// sqrt(3)/2^(4/3) alpha^(-1/3)
double gain_length_ratio(double alpha);

GainScale gain_scales(const PhysicalParams& phys, int n_electrons);

struct MomentumAxis {
  double p_over_q = 0.0;
  double delta = 0.0;
  double kappa = 0.0;
};

MomentumAxis momentum_axis(double p_over_q, double alpha);
MomentumAxis momentum_axis_from_kappa(double kappa, double alpha);

}  // namespace qfel
