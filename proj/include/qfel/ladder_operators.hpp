#pragma once

#include "qfel/ladder_basis.hpp"
#include "qfel/sparse_operator.hpp"

namespace qfel {

enum class PhotonKind { annihilate, create, number };

/// Collective jump Upsilon_{mu nu}: moves one electron from level nu to mu with
/// amplitude sqrt(m_nu (m_mu + 1)); identity on the photon factor.
SparseOperator collective_jump(const CompositeBasis& basis, int mu, int nu);

/// Truncated photon ladder operators; a^dagger |n_max> = 0.
SparseOperator photon_operator(const CompositeBasis& basis, PhotonKind kind);

/// Diagonal c = n - Sum_mu mu m_mu.
SparseOperator charge_operator(const CompositeBasis& basis);

/// Upsilon_00 - Upsilon_11.
SparseOperator inversion_operator(const CompositeBasis& basis);

}  // namespace qfel
