#include "qfel/hamiltonians.hpp"

#include <cmath>
#include <complex>

#include <fmt/format.h>

#include "qfel/errors.hpp"
#include "qfel/ladder_operators.hpp"

namespace qfel {

namespace {

using E = Expression;

E Y(int mu, int nu) { return E::jump(mu, nu); }

bool in_window(const LadderWindow& w, std::initializer_list<int> levels) {
  for (int mu : levels)
    if (!w.contains(mu)) return false;
  return true;
}

int component_range(const LadderWindow& w) { return std::max(2, w.mu_max() - w.mu_min()); }

cplx phase(int mu, double tau) { return std::polar(1.0, 2.0 * mu * tau); }

E component_or_zero(const std::map<int, E>& h, int mu) {
  const auto it = h.find(mu);
  return it == h.end() ? E() : it->second;
}

// Sum_{mu != 0} (1/mu^p) (Y_{mu+1,mu+1} - Y_{mu,mu}) over every mu touching the window
E weighted_inversion_ladder(const LadderWindow& w, int power) {
  E out;
  for (int mu = w.mu_min() - 1; mu <= w.mu_max(); ++mu) {
    if (mu == 0) continue;
    const double c = 1.0 / std::pow(static_cast<double>(mu), power);
    if (w.contains(mu + 1)) out += c * Y(mu + 1, mu + 1);
    if (w.contains(mu)) out -= c * Y(mu, mu);
  }
  return out;
}

// Sum_{mu != 0} (1/mu^p) Y_{mu+1,mu} Y_{mu,mu+1}
E weighted_exchange_ladder(const LadderWindow& w, int power) {
  E out;
  for (int mu = w.mu_min(); mu < w.mu_max(); ++mu) {
    if (mu == 0) continue;
    out += (1.0 / std::pow(static_cast<double>(mu), power)) * Y(mu + 1, mu) * Y(mu, mu + 1);
  }
  return out;
}

E analytic_h2(const LadderWindow& w) {
  const E n_plus_one = E::number() + E::identity();
  return 0.5 * n_plus_one * weighted_inversion_ladder(w, 1) - 0.5 * weighted_exchange_ladder(w, 1);
}

E analytic_h3(const LadderWindow& w, double delta_over_epsilon) {
  const E a = E::annihilate();
  const E ad = E::create();

  E chain;
  for (int mu = w.mu_min() - 2; mu <= w.mu_max(); ++mu) {
    if (mu == 0 || mu == -1) continue;
    if (!in_window(w, {2 * mu + 2, 2 * mu + 1, mu, mu + 2})) continue;
    const double denom = static_cast<double>(mu) * (mu + 1) * (2 * mu + 1);
    chain += (1.0 / denom) * Y(2 * mu + 2, 2 * mu + 1) * Y(mu, mu + 2);
  }
  E bracket = chain;
  bracket -= 0.5 * weighted_inversion_ladder(w, 2) * Y(0, 1);
  if (in_window(w, {-1, 1})) bracket += 1.5 * Y(0, -1) * Y(-1, 1);
  if (in_window(w, {2})) bracket -= 1.5 * Y(0, 2) * Y(2, 1);
  bracket += 0.5 * Y(0, 1);
  E linear = 0.25 * a * bracket;

  E cubic;
  if (in_window(w, {-1, 2})) cubic += 0.25 * a * a * a * Y(-1, 2);
  cubic -= 0.125 * (ad * a * a + a * a * ad) * Y(0, 1);

  E out = linear + linear.adjoint() + cubic + cubic.adjoint();
  if (delta_over_epsilon != 0.0) {
    const E n_plus_one = E::number() + E::identity();
    out += (delta_over_epsilon / 4.0) *
           (n_plus_one * weighted_inversion_ladder(w, 2) - weighted_exchange_ladder(w, 2));
  }
  return out;
}

E averaged_h2(const std::map<int, E>& h, int range) {
  E out;
  for (int nu = -range; nu <= range; ++nu) {
    if (nu == 0) continue;
    const E hp = component_or_zero(h, nu);
    const E hm = component_or_zero(h, -nu);
    if (hp.empty() || hm.empty()) continue;
    out += (-0.5 / (2.0 * nu)) * commutator(hp, hm);
  }
  return out;
}

E averaged_h3(const std::map<int, E>& h, int range) {
  E out;
  for (int mu = -range; mu <= range; ++mu) {
    if (mu == 0) continue;
    const E hmu = component_or_zero(h, mu);
    if (hmu.empty()) continue;
    for (int rho = -range; rho <= range; ++rho) {
      if (rho == 0 || mu + rho == 0) continue;
      const E hrho = component_or_zero(h, rho);
      const E hsum = component_or_zero(h, -(mu + rho));
      if (hrho.empty() || hsum.empty()) continue;
      const double c = -1.0 / 3.0 / (4.0 * mu * (mu + rho));
      out += c * commutator(hsum, commutator(hmu, hrho));
    }
  }
  const E h0 = component_or_zero(h, 0);
  for (int mu = -range; mu <= range; ++mu) {
    if (mu == 0) continue;
    const E hp = component_or_zero(h, mu);
    const E hm = component_or_zero(h, -mu);
    if (hp.empty() || hm.empty()) continue;
    out += (-0.5 / (4.0 * mu * mu)) * commutator(hp, commutator(hm, h0));
  }
  return out;
}

}  // namespace

std::map<int, Expression> fourier_expressions(const LadderWindow& w, double delta_over_epsilon) {
  const E a = E::annihilate();
  const E ad = E::create();
  std::map<int, E> out;
  const int range = component_range(w);
  for (int mu = -range; mu <= range; ++mu) {
    E h;
    if (mu == 0) {
      h = a * Y(0, 1) + ad * Y(1, 0);
      if (delta_over_epsilon != 0.0) h -= delta_over_epsilon * E::number();
    } else {
      if (in_window(w, {mu, mu + 1})) h += a * Y(mu, mu + 1);
      if (in_window(w, {1 - mu, -mu})) h += ad * Y(1 - mu, -mu);
    }
    if (!h.empty()) out.emplace(mu, std::move(h));
  }
  return out;
}

SparseOperator FourierComponents::at(int mu) const {
  const auto it = ops.find(mu);
  if (it == ops.end()) return SparseOperator(basis->dimension());
  return it->second;
}

std::vector<int> FourierComponents::nonzero_indices() const {
  std::vector<int> out;
  for (const auto& [mu, op] : ops) out.push_back(mu);
  return out;
}

FourierComponents fourier_components(std::shared_ptr<const CompositeBasis> basis,
                                     const ModelParams& params) {
  if (!basis) throw DomainError("fourier_components: null basis");
  FourierComponents out;
  out.range = component_range(basis->window());
  out.expressions = fourier_expressions(basis->window(), params.delta_over_epsilon());
  for (const auto& [mu, e] : out.expressions) out.ops.emplace(mu, e.on(*basis));
  out.basis = std::move(basis);
  return out;
}

SparseOperator rotating_hamiltonian(const FourierComponents& components, const ModelParams& params,
                                    double tau) {
  SparseOperator out(components.basis->dimension());
  for (const auto& [mu, op] : components.ops) out += (params.epsilon * phase(mu, tau)) * op;
  return out;
}

LabFrameParts lab_frame_parts(const CompositeBasis& basis, const ModelParams& params) {
  const LadderWindow& w = basis.window();
  E free;
  E hop;
  for (int mu = w.mu_min(); mu <= w.mu_max(); ++mu) {
    const double kinetic = (1.0 + params.delta) / 2.0 - mu;
    free += kinetic * kinetic * Y(mu, mu);
    if (w.contains(mu + 1)) hop += Y(mu, mu + 1);
  }
  const E coupling = E::annihilate() * hop;
  return {free.on(basis), (params.epsilon * (coupling + coupling.adjoint())).on(basis)};
}

const char* to_string(AveragingMode mode) {
  return mode == AveragingMode::analytic ? "analytic" : "averaged";
}

void require_margin(const LadderWindow& w, int order) {
  if (order < 1 || order > 3) {
    throw DomainError(fmt::format("averaging order must be 1, 2 or 3, got {}", order));
  }
  if (order == 1) return;
  if (w.mu_min() > -order || w.mu_max() < 1 + order) {
    throw DomainError(fmt::format(
        "order {} needs a window containing [{}, {}], got [{}, {}]", order, -order, 1 + order,
        w.mu_min(), w.mu_max()));
  }
}

Expression effective_expression(const LadderWindow& w, const ModelParams& params, int order,
                                AveragingMode mode) {
  require_margin(w, order);
  const double d = params.delta_over_epsilon();
  if (order == 1) return fourier_expressions(w, d).at(0);
  if (mode == AveragingMode::analytic) {
    if (order == 2) return analytic_h2(w);
    return analytic_h3(w, d);
  }
  const auto h = fourier_expressions(w, d);
  const int range = component_range(w);
  return order == 2 ? averaged_h2(h, range) : averaged_h3(h, range);
}

SparseOperator effective_hamiltonian(const CompositeBasis& basis, const ModelParams& params,
                                     int order, AveragingMode mode) {
  return effective_expression(basis.window(), params, order, mode).on(basis);
}

EffectiveHamiltonianSet effective_hamiltonian_set(const CompositeBasis& basis,
                                                  const ModelParams& params, AveragingMode mode) {
  return {effective_hamiltonian(basis, params, 1, mode), effective_hamiltonian(basis, params, 2, mode),
          effective_hamiltonian(basis, params, 3, mode), mode};
}

SparseOperator effective_generator(const CompositeBasis& basis, const ModelParams& params,
                                   int max_order, AveragingMode mode) {
  require_margin(basis.window(), max_order);
  E total;
  double scale = 1.0;
  for (int k = 1; k <= max_order; ++k) {
    scale *= params.epsilon;
    total += scale * effective_expression(basis.window(), params, k, mode);
  }
  return total.on(basis);
}

SparseOperator generator_f(const CompositeBasis& basis, const ModelParams& params, int order,
                           double tau) {
  if (order != 1 && order != 2) {
    throw DomainError(fmt::format("generator order must be 1 or 2, got {}", order));
  }
  require_margin(basis.window(), order);
  const auto h = fourier_expressions(basis.window(), params.delta_over_epsilon());
  const int range = component_range(basis.window());
  E out;
  if (order == 1) {
    for (const auto& [mu, hmu] : h) {
      if (mu == 0) continue;
      out -= (phase(mu, tau) / (2.0 * mu)) * hmu;
    }
    return out.on(basis);
  }
  for (int mu = -range; mu <= range; ++mu) {
    if (mu == 0) continue;
    const E hmu = component_or_zero(h, mu);
    if (hmu.empty()) continue;
    for (int rho = -range; rho <= range; ++rho) {
      if (rho == 0 || rho == mu) continue;
      const E other = component_or_zero(h, rho - mu);
      if (other.empty()) continue;
      out += (0.5 * phase(rho, tau) / (4.0 * mu * rho)) * commutator(hmu, other);
    }
  }
  const E h0 = component_or_zero(h, 0);
  for (const auto& [mu, hmu] : h) {
    if (mu == 0) continue;
    out += (phase(mu, tau) / (4.0 * mu * mu)) * commutator(hmu, h0);
  }
  return out.on(basis);
}

std::vector<std::size_t> interior_states(const CompositeBasis& basis, int order) {
  const LadderWindow& w = basis.window();
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < basis.dimension(); ++i) {
    if (basis.photons(i) > basis.n_max() - order) continue;
    const Occupation& m = basis.occupation(i);
    bool inside = true;
    for (int mu = w.mu_min(); mu <= w.mu_max() && inside; ++mu) {
      if (m[w.slot(mu)] > 0 && (mu < w.mu_min() + order || mu > w.mu_max() - order)) inside = false;
    }
    if (inside) out.push_back(i);
  }
  return out;
}

}  // namespace qfel
