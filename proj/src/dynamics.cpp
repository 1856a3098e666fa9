#include "qfel/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "qfel/errors.hpp"

namespace qfel {

namespace {

constexpr double kC1 = 0.5 - 0.28867513459481287;  // 1/2 - sqrt(3)/6
constexpr double kC2 = 0.5 + 0.28867513459481287;
constexpr double kA1 = 0.25 + 0.28867513459481287;  // 1/4 + sqrt(3)/6
constexpr double kA2 = 0.25 - 0.28867513459481287;

Occupation all_at_zero(const CompositeBasis& b) {
  Occupation m(static_cast<std::size_t>(b.window().size()), 0);
  m[b.window().slot(0)] = b.n_electrons();
  return m;
}

StateVector basis_state(std::shared_ptr<const CompositeBasis> basis, int photons) {
  const auto row = basis->index_of(StateLabel{all_at_zero(*basis), photons});
  if (!row) {
    throw DomainError(fmt::format("seed state with n={} is not part of the basis", photons));
  }
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->dimension()));
  amps[static_cast<Eigen::Index>(*row)] = 1.0;
  return {std::move(basis), std::move(amps)};
}

StateVector fock_seed(std::shared_ptr<const CompositeBasis> basis, double n0) {
  if (n0 < 0.0 || n0 != std::floor(n0)) {
    throw DomainError(fmt::format("fock seed needs a nonnegative integer, got {}", n0));
  }
  const int n = static_cast<int>(n0);
  if (n > basis->n_max()) {
    throw CapacityError(fmt::format("fock seed n0={} needs n_max >= {}, basis has {}", n, n, basis->n_max()));
  }
  if (basis->charge_sector() && *basis->charge_sector() != n) {
    throw DomainError(fmt::format("fock seed n0={} lies in charge sector {}, basis is restricted to {}", n,
                                  n, *basis->charge_sector()));
  }
  return basis_state(std::move(basis), n);
}

StateVector coherent_seed(std::shared_ptr<const CompositeBasis> basis, double mean, double tol) {
  if (mean < 0.0) throw DomainError("coherent seed mean must be nonnegative");
  if (basis->charge_sector()) {
    throw DomainError("coherent seed spans several charge sectors; use a basis without a sector");
  }
  // Poisson weights in log space
  auto weight = [mean](int n) {
    if (mean == 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(n * std::log(mean) - mean - std::lgamma(n + 1.0));
  };
  double kept = 0.0;
  for (int n = 0; n <= basis->n_max(); ++n) kept += weight(n);
  if (1.0 - kept > tol) {
    int needed = basis->n_max();
    double acc = kept;
    while (1.0 - acc > tol) acc += weight(++needed);
    throw CapacityError(fmt::format("coherent seed with mean {} loses tail mass {:.3g} > {:.3g}; needs n_max >= {}",
                                    mean, 1.0 - kept, tol, needed));
  }
  const Occupation m = all_at_zero(*basis);
  Eigen::VectorXcd amps = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->dimension()));
  for (int n = 0; n <= basis->n_max(); ++n) {
    const auto row = basis->index_of(StateLabel{m, n});
    amps[static_cast<Eigen::Index>(*row)] = std::sqrt(weight(n) / kept);
  }
  return {std::move(basis), std::move(amps)};
}

MixedEnsemble thermal_seed(const std::shared_ptr<const CompositeBasis>& basis, double mean, double tol) {
  if (mean < 0.0) throw DomainError("thermal seed mean must be nonnegative");
  MixedEnsemble out;
  if (mean == 0.0) {
    auto member_basis = basis->charge_sector()
                            ? enumerate_basis(basis->n_electrons(), basis->window(), basis->n_max(), 0)
                            : basis;
    out.members.push_back({1.0, basis_state(std::move(member_basis), 0)});
    return out;
  }
  const double ratio = mean / (1.0 + mean);
  const double tail = std::pow(ratio, basis->n_max() + 1);
  if (tail > tol) {
    const int needed = static_cast<int>(std::ceil(std::log(tol) / std::log(ratio))) - 1;
    throw CapacityError(fmt::format("thermal seed with mean {} loses tail mass {:.3g} > {:.3g}; needs n_max >= {}",
                                    mean, tail, tol, needed));
  }
  out.discarded_tail = tail;
  for (int n = 0; n <= basis->n_max(); ++n) {
    const double w = std::pow(ratio, n) / (1.0 + mean) / (1.0 - tail);
    auto member_basis = basis->charge_sector()
                            ? enumerate_basis(basis->n_electrons(), basis->window(), basis->n_max(), n)
                            : basis;
    out.members.push_back({w, basis_state(std::move(member_basis), n)});
  }
  return out;
}

std::vector<char> leakage_mask(const CompositeBasis& b) {
  const LadderWindow& w = b.window();
  std::vector<int> edges;
  if (w.mu_min() < 0) edges.push_back(w.mu_min());
  if (w.mu_max() > 1) edges.push_back(w.mu_max());
  std::vector<char> mask(b.dimension(), 0);
  for (std::size_t i = 0; i < b.dimension(); ++i) {
    bool edge = b.photons(i) == b.n_max();
    for (int mu : edges) edge = edge || b.occupation(i)[w.slot(mu)] > 0;
    mask[i] = edge;
  }
  return mask;
}

double masked_weight(const Eigen::VectorXcd& v, const std::vector<char>& mask) {
  double sum = 0.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (mask[static_cast<std::size_t>(i)]) sum += std::norm(v[i]);
  return sum;
}

TrajectoryPoint point_from(double tau, const Observables& o, int n_electrons) {
  return {tau, o.n_mean, o.n_second, o.n_var, o.inversion / n_electrons, o.norm, o.charge};
}

double clamp_variance(double var) {
  if (var < 0.0 && var > -1e-10) return 0.0;
  return var;
}

struct SingleRun {
  std::vector<TrajectoryPoint> points;
  double max_norm_drift = 0.0;
  double max_leakage = 0.0;
};

class Stepper {
 public:
  Stepper(const Generator::Resolved& g, Scheme scheme) : g_(g), scheme_(scheme) {}

  void step(Eigen::VectorXcd& psi, double t, double h) const {
    if (g_.fixed) {
      const SparseOperator& op = *g_.fixed;
      if (scheme_ == Scheme::rk4) {
        rk4(psi, t, h, [&](double, const Eigen::VectorXcd& v) { return op.apply(v); });
      } else {
        psi = expm_action([&](const Eigen::VectorXcd& v) { return op.apply(v); }, op.one_norm(), h, psi);
      }
      return;
    }
    if (scheme_ == Scheme::rk4) {
      rk4(psi, t, h, [&](double s, const Eigen::VectorXcd& v) { return combined(weights(s, 1.0, s, 0.0), v); });
      return;
    }
    const double t1 = t + kC1 * h;
    const double t2 = t + kC2 * h;
    for (const auto& [a, b] : {std::pair{kA1, kA2}, std::pair{kA2, kA1}}) {
      const auto w = weights(t1, a, t2, b);
      double bound = 0.0;
      for (const auto& [mu, c] : w) bound += std::abs(c) * g_.component_norms.at(mu);
      psi = expm_action([&](const Eigen::VectorXcd& v) { return combined(w, v); }, bound, h, psi);
    }
  }

 private:
  std::map<int, cplx> weights(double t1, double a, double t2, double b) const {
    std::map<int, cplx> w;
    for (const auto& [mu, op] : g_.components) {
      w[mu] = a * std::polar(1.0, 2.0 * mu * t1) + b * std::polar(1.0, 2.0 * mu * t2);
    }
    return w;
  }

  Eigen::VectorXcd combined(const std::map<int, cplx>& w, const Eigen::VectorXcd& v) const {
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(v.size());
    for (const auto& [mu, op] : g_.components) out += w.at(mu) * (op.matrix() * v);
    return out;
  }

  template <class F>
  static void rk4(Eigen::VectorXcd& psi, double t, double h, F&& apply_h) {
    const cplx mi{0.0, -1.0};
    const Eigen::VectorXcd k1 = mi * apply_h(t, psi);
    const Eigen::VectorXcd k2 = mi * apply_h(t + 0.5 * h, psi + 0.5 * h * k1);
    const Eigen::VectorXcd k3 = mi * apply_h(t + 0.5 * h, psi + 0.5 * h * k2);
    const Eigen::VectorXcd k4 = mi * apply_h(t + h, psi + h * k3);
    psi += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }

  const Generator::Resolved& g_;
  Scheme scheme_;
};

SingleRun run_once(const StateVector& state, const Generator::Resolved& g, Scheme scheme,
                   const std::vector<double>& grid, double h) {
  const Stepper stepper(g, scheme);
  const auto mask = leakage_mask(*state.basis);
  const int n_electrons = state.basis->n_electrons();
  SingleRun run;
  Eigen::VectorXcd psi = state.amplitudes;
  const double norm0 = psi.norm();
  run.points.push_back(point_from(grid.front(), observables(StateVector{state.basis, psi}), n_electrons));
  run.max_leakage = masked_weight(psi, mask);
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double span = grid[k] - grid[k - 1];
    const int substeps = std::max(1, static_cast<int>(std::ceil(span / h - 1e-9)));
    const double hs = span / substeps;
    for (int s = 0; s < substeps; ++s) {
      stepper.step(psi, grid[k - 1] + s * hs, hs);
      run.max_norm_drift = std::max(run.max_norm_drift, std::abs(psi.norm() - norm0));
      run.max_leakage = std::max(run.max_leakage, masked_weight(psi, mask));
    }
    run.points.push_back(point_from(grid[k], observables(StateVector{state.basis, psi}), n_electrons));
  }
  return run;
}

double max_change(const std::vector<TrajectoryPoint>& a, const std::vector<TrajectoryPoint>& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (auto field : {&TrajectoryPoint::n_mean, &TrajectoryPoint::n_second, &TrajectoryPoint::inversion}) {
      const double x = a[i].*field;
      const double y = b[i].*field;
      worst = std::max(worst, std::abs(x - y) / std::max(1.0, std::abs(y)));
    }
  }
  return worst;
}

Trajectory evolve_member(const StateVector& state, const Generator& generator,
                         const std::vector<double>& grid, const IntegratorConfig& config) {
  const auto& resolved = generator.resolve(state.basis);
  Trajectory out;
  out.scheme = config.scheme;
  double h = config.dtau;
  SingleRun coarse = run_once(state, resolved, config.scheme, grid, h);
  out.audit.converged = false;
  for (int halving = 1; halving <= config.max_halvings; ++halving) {
    SingleRun fine = run_once(state, resolved, config.scheme, grid, h / 2.0);
    const double change = max_change(coarse.points, fine.points);
    h /= 2.0;
    coarse = std::move(fine);
    out.halvings = halving;
    out.audit.final_change = change;
    if (change < config.rtol) {
      out.audit.converged = true;
      break;
    }
  }
  out.step = h;
  out.points = std::move(coarse.points);
  out.audit.max_norm_drift = coarse.max_norm_drift;
  out.audit.max_leakage = coarse.max_leakage;
  return out;
}

void check_grid(const std::vector<double>& grid) {
  if (grid.empty()) throw DomainError("tau grid is empty");
  if (grid.front() != 0.0) throw DomainError("tau grid must start at 0");
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (!(grid[i] > grid[i - 1])) throw DomainError("tau grid must be strictly ascending");
  }
}

void apply_audit(TrajectoryAudit& audit, const IntegratorConfig& config) {
  audit.norm_flag = audit.max_norm_drift > config.norm_threshold;
  audit.leakage_flag = audit.max_leakage > config.leakage_threshold;
  if (audit.max_norm_drift > config.hard_factor * config.norm_threshold) {
    throw AuditError(fmt::format("norm drift {:.3g} exceeds {} x threshold {:.3g}", audit.max_norm_drift,
                                 config.hard_factor, config.norm_threshold));
  }
  if (audit.max_leakage > config.hard_factor * config.leakage_threshold) {
    throw AuditError(fmt::format("boundary leakage {:.3g} exceeds {} x threshold {:.3g}; enlarge the window or n_max",
                                 audit.max_leakage, config.hard_factor, config.leakage_threshold));
  }
}

}  // namespace

QuantumState initial_state(std::shared_ptr<const CompositeBasis> basis, PhotonSeed seed,
                           SeedTolerances tolerances) {
  if (!basis) throw DomainError("initial_state: null basis");
  switch (seed.kind) {
    case SeedKind::fock:
      return fock_seed(std::move(basis), seed.n0);
    case SeedKind::coherent:
      return coherent_seed(std::move(basis), seed.n0, tolerances.coherent_tail);
    case SeedKind::thermal:
      return thermal_seed(basis, seed.n0, tolerances.thermal_tail);
  }
  throw DomainError("unknown seed kind");
}

Observables observables(const StateVector& state) {
  const CompositeBasis& b = *state.basis;
  if (static_cast<std::size_t>(state.amplitudes.size()) != b.dimension()) {
    throw DomainError("state length does not match basis dimension");
  }
  const std::size_t s0 = b.window().slot(0);
  const std::size_t s1 = b.window().slot(1);
  Observables o;
  for (std::size_t i = 0; i < b.dimension(); ++i) {
    const double p = std::norm(state.amplitudes[static_cast<Eigen::Index>(i)]);
    if (p == 0.0) continue;
    const double n = b.photons(i);
    o.n_mean += p * n;
    o.n_second += p * n * n;
    o.inversion += p * (b.occupation(i)[s0] - b.occupation(i)[s1]);
    o.charge += p * b.charge(i);
    o.norm += p;
  }
  o.norm = std::sqrt(o.norm);
  o.n_var = clamp_variance(o.n_second - o.n_mean * o.n_mean);
  return o;
}

Observables observables(const MixedEnsemble& ensemble) {
  Observables o;
  for (const auto& m : ensemble.members) {
    const Observables x = observables(m.state);
    o.n_mean += m.weight * x.n_mean;
    o.n_second += m.weight * x.n_second;
    o.inversion += m.weight * x.inversion;
    o.charge += m.weight * x.charge;
    o.norm += m.weight * x.norm;
  }
  o.n_var = clamp_variance(o.n_second - o.n_mean * o.n_mean);
  return o;
}

Observables observables(const QuantumState& state) {
  return std::visit([](const auto& s) { return observables(s); }, state);
}

const char* to_string(Scheme scheme) { return scheme == Scheme::cf4 ? "cf4" : "rk4"; }

void validate(const IntegratorConfig& c) {
  if (!(c.dtau > 0.0)) throw DomainError("integrator step must be positive");
  if (!(c.rtol > 0.0 && c.rtol <= 1e-3)) throw DomainError("rtol must lie in (0, 1e-3]");
  if (c.max_halvings < 1) throw DomainError("max_halvings must be at least 1");
  if (!(c.norm_threshold > 0.0) || !(c.leakage_threshold > 0.0) || !(c.hard_factor >= 1.0)) {
    throw DomainError("audit thresholds must be positive");
  }
}

Generator Generator::fixed(SparseOperator op) {
  Generator g;
  g.kind_ = Kind::fixed;
  g.fixed_ = std::move(op);
  return g;
}

Generator Generator::rotating(ModelParams params) {
  Generator g;
  g.kind_ = Kind::rotating;
  g.params_ = params;
  return g;
}

Generator Generator::rotating(const FourierComponents& components, ModelParams params) {
  Generator g = rotating(params);
  Resolved r;
  r.basis = components.basis;
  for (const auto& [mu, op] : components.ops) {
    r.components.emplace(mu, params.epsilon * op);
    r.component_norms.emplace(mu, params.epsilon * op.one_norm());
  }
  g.cache_.emplace(components.basis.get(), std::move(r));
  return g;
}

Generator Generator::effective(ModelParams params, int max_order, AveragingMode mode) {
  Generator g;
  g.kind_ = Kind::effective;
  g.params_ = params;
  g.max_order_ = max_order;
  g.mode_ = mode;
  return g;
}

const Generator::Resolved& Generator::resolve(const std::shared_ptr<const CompositeBasis>& basis) const {
  if (const auto it = cache_.find(basis.get()); it != cache_.end()) return it->second;
  Resolved r;
  r.basis = basis;
  switch (kind_) {
    case Kind::fixed:
      if (fixed_->dim() != basis->dimension()) {
        throw DomainError(fmt::format("generator dimension {} does not match basis dimension {}", fixed_->dim(),
                                      basis->dimension()));
      }
      r.fixed = *fixed_;
      break;
    case Kind::effective:
      r.fixed = effective_generator(*basis, params_, max_order_, mode_);
      break;
    case Kind::rotating: {
      const auto fc = fourier_components(basis, params_);
      for (const auto& [mu, op] : fc.ops) {
        r.components.emplace(mu, params_.epsilon * op);
        r.component_norms.emplace(mu, params_.epsilon * op.one_norm());
      }
      break;
    }
  }
  return cache_.emplace(basis.get(), std::move(r)).first->second;
}

Eigen::VectorXcd expm_action(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply,
                             double norm, double t, const Eigen::VectorXcd& v) {
  const double scaled = norm * std::abs(t);
  const int substeps = std::max(1, static_cast<int>(std::ceil(scaled)));
  const cplx factor{0.0, -t / substeps};
  Eigen::VectorXcd out = v;
  for (int s = 0; s < substeps; ++s) {
    Eigen::VectorXcd term = out;
    Eigen::VectorXcd sum = out;
    const double ref = out.norm();
    for (int k = 1; k <= 60; ++k) {
      term = (factor / static_cast<double>(k)) * apply(term);
      sum += term;
      if (term.norm() <= 1e-17 * ref) break;
    }
    out = std::move(sum);
  }
  return out;
}

double boundary_leakage(const StateVector& state) {
  return masked_weight(state.amplitudes, leakage_mask(*state.basis));
}

Trajectory evolve(const QuantumState& state, const Generator& generator, const std::vector<double>& tau_grid,
                  const IntegratorConfig& config) {
  validate(config);
  check_grid(tau_grid);
  if (const auto* single = std::get_if<StateVector>(&state)) {
    Trajectory t = evolve_member(*single, generator, tau_grid, config);
    apply_audit(t.audit, config);
    return t;
  }
  const auto& ensemble = std::get<MixedEnsemble>(state);
  if (ensemble.members.empty()) throw DomainError("ensemble has no members");
  Trajectory out;
  out.scheme = config.scheme;
  out.step = config.dtau;
  out.points.assign(tau_grid.size(), TrajectoryPoint{});
  for (std::size_t i = 0; i < tau_grid.size(); ++i) out.points[i].tau = tau_grid[i];
  for (const auto& m : ensemble.members) {
    const Trajectory t = evolve_member(m.state, generator, tau_grid, config);
    for (std::size_t i = 0; i < tau_grid.size(); ++i) {
      auto& p = out.points[i];
      p.n_mean += m.weight * t.points[i].n_mean;
      p.n_second += m.weight * t.points[i].n_second;
      p.inversion += m.weight * t.points[i].inversion;
      p.norm += m.weight * t.points[i].norm;
      p.charge += m.weight * t.points[i].charge;
    }
    out.step = std::min(out.step, t.step);
    out.halvings = std::max(out.halvings, t.halvings);
    out.audit.max_norm_drift = std::max(out.audit.max_norm_drift, t.audit.max_norm_drift);
    // weighted: a member sitting at n = n_max carries only its tail weight
    out.audit.max_leakage += m.weight * t.audit.max_leakage;
    out.audit.final_change = std::max(out.audit.final_change, t.audit.final_change);
    out.audit.converged = out.audit.converged && t.audit.converged;
  }
  for (auto& p : out.points) p.n_var = clamp_variance(p.n_second - p.n_mean * p.n_mean);
  apply_audit(out.audit, config);
  return out;
}

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory) {
  out << "tau,n_mean,n_var,inversion,norm,charge\n";
  for (const auto& p : trajectory.points) {
    fmt::print(out, "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", p.tau, p.n_mean, p.n_var, p.inversion,
               p.norm, p.charge);
  }
}

}  // namespace qfel
