#pragma once

#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "qfel/hamiltonians.hpp"
#include "qfel/ladder_basis.hpp"
#include "qfel/model_params.hpp"
#include "qfel/sparse_operator.hpp"

namespace qfel {

// Audit threshold exceeded by more than the hard factor.
class AuditError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct StateVector {
  std::shared_ptr<const CompositeBasis> basis;
  Eigen::VectorXcd amplitudes;
};

struct EnsembleMember {
  double weight;
  StateVector state;
};

/// Incoherent mixture; members may live on different charge sectors.
struct MixedEnsemble {
  std::vector<EnsembleMember> members;
  double discarded_tail = 0.0;
};

using QuantumState = std::variant<StateVector, MixedEnsemble>;

enum class SeedKind { fock, coherent, thermal };

struct PhotonSeed {
  SeedKind kind = SeedKind::fock;
  // photon number for fock, mean photon number otherwise
  double n0 = 0.0;
};

struct SeedTolerances {
  double coherent_tail = 1e-8;
  double thermal_tail = 1e-6;
};

/// All electrons at mu = 0 with the requested photon state. On a basis with
/// a charge sector, a Fock seed must lie in the sector and thermal members are
/// placed on their own sector bases; coherent seeds need an unrestricted basis.
QuantumState initial_state(std::shared_ptr<const CompositeBasis> basis, PhotonSeed seed,
                           SeedTolerances tolerances = {});

struct Observables {
  double n_mean = 0.0;
  double n_second = 0.0;
  double n_var = 0.0;
  double inversion = 0.0;
  double norm = 0.0;
  double charge = 0.0;
};

Observables observables(const StateVector& state);
Observables observables(const MixedEnsemble& ensemble);
Observables observables(const QuantumState& state);

enum class Scheme { cf4, rk4 };

const char* to_string(Scheme scheme);

struct IntegratorConfig {
  Scheme scheme = Scheme::cf4;
  double dtau = 0.07853981633974483;  // pi/40
  double rtol = 1e-7;
  int max_halvings = 6;
  double norm_threshold = 1e-9;
  double leakage_threshold = 0.05;
  double hard_factor = 10.0;
};

void validate(const IntegratorConfig& config);

/// What drives the evolution. Static generators are time independent; the
/// rotating generator is H'(tau) = epsilon Sum_mu H_mu exp(2 i mu tau).
/// Effective and rotating generators are rebuilt per basis so that ensemble
/// members on different charge sectors can share one description.
class Generator {
 public:
  static Generator fixed(SparseOperator op);
  static Generator rotating(ModelParams params);
  static Generator rotating(const FourierComponents& components, ModelParams params);
  static Generator effective(ModelParams params, int max_order,
                             AveragingMode mode = AveragingMode::analytic);

  bool time_dependent() const { return kind_ == Kind::rotating; }

  struct Resolved {
    // held so the cache key cannot be reused by another basis
    std::shared_ptr<const CompositeBasis> basis;
    // static part (time independent generators)
    std::optional<SparseOperator> fixed;
    // oscillating parts: mu -> epsilon H_mu
    std::map<int, SparseOperator> components;
    std::map<int, double> component_norms;
  };
  const Resolved& resolve(const std::shared_ptr<const CompositeBasis>& basis) const;

 private:
  enum class Kind { fixed, rotating, effective };

  Kind kind_ = Kind::fixed;
  ModelParams params_{};
  int max_order_ = 1;
  AveragingMode mode_ = AveragingMode::analytic;
  std::optional<SparseOperator> fixed_;
  std::shared_ptr<const CompositeBasis> fixed_basis_;
  mutable std::map<const CompositeBasis*, Resolved> cache_;
};

struct TrajectoryPoint {
  double tau;
  double n_mean;
  double n_second;
  double n_var;
  // <Y_z>/N
  double inversion;
  double norm;
  double charge;
};

struct TrajectoryAudit {
  double max_norm_drift = 0.0;
  double max_leakage = 0.0;
  bool norm_flag = false;
  bool leakage_flag = false;
  bool converged = true;
  double final_change = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryPoint> points;
  Scheme scheme = Scheme::cf4;
  double step = 0.0;
  int halvings = 0;
  TrajectoryAudit audit;
};

Trajectory evolve(const QuantumState& state, const Generator& generator,
                  const std::vector<double>& tau_grid, const IntegratorConfig& config = {});

/// Probability weight on states touching the truncation edges: an electron on
/// an outermost window level other than 0 and 1, or n = n_max.
double boundary_leakage(const StateVector& state);

/// exp(-i t A) v by a scaled Taylor series; `norm` bounds ||A||_1.
Eigen::VectorXcd expm_action(const std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>& apply,
                             double norm, double t, const Eigen::VectorXcd& v);

void write_trajectory_csv(std::ostream& out, const Trajectory& trajectory);

}  // namespace qfel
