#pragma once

#include <map>
#include <memory>
#include <vector>

#include "qfel/ladder_basis.hpp"
#include "qfel/model_params.hpp"
#include "qfel/operator_expression.hpp"
#include "qfel/sparse_operator.hpp"

namespace qfel {

/// Symbolic Fourier components on a window:
///   H_0  = a Y_{0,1} + a^dag Y_{1,0} - (Delta/epsilon) n
///   H_mu = a Y_{mu,mu+1} + a^dag Y_{1-mu,-mu}
/// Components that vanish on the window are omitted.
std::map<int, Expression> fourier_expressions(const LadderWindow& window, double delta_over_epsilon);

struct FourierComponents {
  std::shared_ptr<const CompositeBasis> basis;
  // mu runs over [-range, range]; absent keys are zero operators
  int range = 0;
  std::map<int, SparseOperator> ops;
  std::map<int, Expression> expressions;

  // zero operator for components that vanish on the window
  SparseOperator at(int mu) const;
  std::vector<int> nonzero_indices() const;
};

FourierComponents fourier_components(std::shared_ptr<const CompositeBasis> basis,
                                     const ModelParams& params);

/// H'(tau) = epsilon Sum_mu H_mu exp(2 i mu tau).
SparseOperator rotating_hamiltonian(const FourierComponents& components, const ModelParams& params,
                                    double tau);

struct LabFrameParts {
  SparseOperator h0;
  SparseOperator h1;
};

/// H0 = Sum_mu ((1+Delta)/2 - mu)^2 Y_{mu mu}, H1 = epsilon (a Sum_mu Y_{mu,mu+1} + h.c.).
/// Conjugating H1 with exp(-i tau (H0 + Delta n)) reproduces H'(tau) + Delta n.
LabFrameParts lab_frame_parts(const CompositeBasis& basis, const ModelParams& params);

enum class AveragingMode { analytic, averaged };

const char* to_string(AveragingMode mode);

/// Bare averaging coefficient H^(k), so that the effective Hamiltonian is
/// Sum_k epsilon^k H^(k). Order 1 is the time-independent component H_0.
Expression effective_expression(const LadderWindow& window, const ModelParams& params, int order,
                                AveragingMode mode);
SparseOperator effective_hamiltonian(const CompositeBasis& basis, const ModelParams& params,
                                     int order, AveragingMode mode);

struct EffectiveHamiltonianSet {
  SparseOperator h1;
  SparseOperator h2;
  SparseOperator h3;
  AveragingMode mode = AveragingMode::analytic;
};

EffectiveHamiltonianSet effective_hamiltonian_set(const CompositeBasis& basis,
                                                  const ModelParams& params, AveragingMode mode);

/// Sum_{k <= max_order} epsilon^k H^(k).
SparseOperator effective_generator(const CompositeBasis& basis, const ModelParams& params,
                                   int max_order, AveragingMode mode = AveragingMode::analytic);

/// Anti-Hermitian averaging generators F^(1)(tau), F^(2)(tau).
SparseOperator generator_f(const CompositeBasis& basis, const ModelParams& params, int order,
                           double tau);

/// Throws DomainError unless the window extends `order` levels beyond the
/// resonant pair {0, 1} on both sides (orders >= 2).
void require_margin(const LadderWindow& window, int order);

/// States whose populated levels lie within [mu_min + order, mu_max - order]
/// and whose photon number is at most n_max - order.
std::vector<std::size_t> interior_states(const CompositeBasis& basis, int order);

}  // namespace qfel
