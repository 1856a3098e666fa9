#include "qfel/model_params.hpp"

#include <cmath>

#include <fmt/format.h>

#include "qfel/errors.hpp"

namespace qfel {

double ModelParams::alpha_n() const { return epsilon * std::sqrt(static_cast<double>(n_electrons)); }

double ModelParams::kappa() const { return delta / alpha_n(); }

ModelParams make_model_params(int n_electrons, double epsilon, double delta) {
  if (n_electrons < 1) {
    throw DomainError(fmt::format("electron number must be positive, got {}", n_electrons));
  }
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) {
    throw DomainError(fmt::format("epsilon must be positive, got {}", epsilon));
  }
  if (!std::isfinite(delta)) throw DomainError("detuning must be finite");
  return ModelParams{n_electrons, epsilon, delta};
}

ModelParams model_from_alpha_kappa(int n_electrons, double alpha, double kappa) {
  if (!(alpha > 0.0)) throw DomainError(fmt::format("alpha must be positive, got {}", alpha));
  if (n_electrons < 1) {
    throw DomainError(fmt::format("electron number must be positive, got {}", n_electrons));
  }
  return make_model_params(n_electrons, alpha / std::sqrt(static_cast<double>(n_electrons)),
                           kappa * alpha);
}

PhysicalParams PhysicalParams::from_raw(const RawPhysics& raw, double p, double c) {
  for (double v : {raw.e, raw.m, raw.hbar, raw.k, raw.vacuum_amplitude, raw.wiggler_amplitude, c}) {
    if (!(v > 0.0)) throw DomainError("physical constants must be positive");
  }
  PhysicalParams out;
  out.g = raw.e * raw.e * raw.vacuum_amplitude * raw.wiggler_amplitude / (raw.hbar * raw.m);
  out.q = 2.0 * raw.hbar * raw.k;
  out.omega_r = out.q * out.q / (2.0 * raw.m * raw.hbar);
  out.p = p;
  out.c = c;
  return out;
}

ModelParams PhysicalParams::to_model_params(int n_electrons) const {
  if (!(omega_r > 0.0)) throw DomainError("recoil frequency must be positive");
  if (!(q > 0.0)) throw DomainError("recoil momentum must be positive");
  return make_model_params(n_electrons, g / omega_r, 2.0 * p / q - 1.0);
}

}  // namespace qfel
