#pragma once

#include <optional>

namespace qfel {

/// Dimensionless model: coupling epsilon = g/omega_r, detuning
/// Delta = (p - q/2)/(q/2), electron number N.
struct ModelParams {
  int n_electrons = 1;
  double epsilon = 0.1;
  double delta = 0.0;

  double alpha_n() const;
  double kappa() const;
  bool quantum_regime() const { return alpha_n() < 1.0; }
  double delta_over_epsilon() const { return delta / epsilon; }
};

// Validates N >= 1 and epsilon > 0.
ModelParams make_model_params(int n_electrons, double epsilon, double delta);
// epsilon = alpha/sqrt(N), Delta = kappa*alpha.
ModelParams model_from_alpha_kappa(int n_electrons, double alpha, double kappa);

/// Raw constants from which g and omega_r follow: g = e^2 A_L A_W/(hbar m),
/// q = 2 hbar k, omega_r = q^2/(2 m hbar).
struct RawPhysics {
  double e;
  double m;
  double hbar;
  double k;
  double vacuum_amplitude;
  double wiggler_amplitude;
};

struct PhysicalParams {
  double g = 0.0;
  double omega_r = 0.0;
  double q = 0.0;
  double p = 0.0;
  double c = 299'792'458.0;

  static PhysicalParams from_raw(const RawPhysics& raw, double p, double c = 299'792'458.0);
  ModelParams to_model_params(int n_electrons) const;
};

}  // namespace qfel
