#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace qfel {

inline constexpr std::size_t kDefaultMaxDimension = 5'000'000;

/// Reads QFEL_MAX_DIM from the environment, falling back to
/// kDefaultMaxDimension when unset or unparsable.
std::size_t max_dimension_from_env();

/// Contiguous range of momentum-ladder levels; level mu labels momentum p - mu*q.
/// Always contains the resonant pair mu = 0 and mu = 1.
class LadderWindow {
 public:
  LadderWindow(int mu_min, int mu_max);

  int mu_min() const { return mu_min_; }
  int mu_max() const { return mu_max_; }
  int size() const { return mu_max_ - mu_min_ + 1; }
  bool contains(int mu) const { return mu >= mu_min_ && mu <= mu_max_; }
  // Position of level mu inside an occupation vector.
  std::size_t slot(int mu) const { return static_cast<std::size_t>(mu - mu_min_); }

  friend bool operator==(const LadderWindow&, const LadderWindow&) = default;

 private:
  int mu_min_;
  int mu_max_;
};

// Occupation numbers (m_{mu_min}, ..., m_{mu_max}).
using Occupation = std::vector<int>;

/// Permutation-symmetric N-electron states on a ladder window, in
/// descending lexicographic order of the occupation vector.
class SymmetricElectronBasis {
 public:
  SymmetricElectronBasis(int n_electrons, LadderWindow window,
                         std::size_t max_states = kDefaultMaxDimension);

  int n_electrons() const { return n_electrons_; }
  const LadderWindow& window() const { return window_; }
  std::size_t size() const { return states_.size(); }
  const std::vector<Occupation>& states() const { return states_; }
  const Occupation& state(std::size_t i) const { return states_[i]; }
  std::optional<std::size_t> index_of(const Occupation& m) const;

  // Sum_mu mu * m_mu.
  int ladder_moment(const Occupation& m) const;

 private:
  int n_electrons_;
  LadderWindow window_;
  std::vector<Occupation> states_;
  std::map<Occupation, std::size_t> index_;
};

/// One composite basis label: electron occupation plus photon number.
struct StateLabel {
  Occupation occupation;
  int photons = 0;
};

/// Electron basis tensored with photon Fock states 0..n_max, optionally
/// restricted to a fixed conserved charge c = n - Sum_mu mu*m_mu.
/// States are ordered electron-major, photon-minor.
class CompositeBasis {
 public:
  CompositeBasis(SymmetricElectronBasis electron, int n_max,
                 std::optional<int> charge_sector,
                 std::size_t max_dimension = kDefaultMaxDimension);

  const SymmetricElectronBasis& electron() const { return electron_; }
  const LadderWindow& window() const { return electron_.window(); }
  int n_electrons() const { return electron_.n_electrons(); }
  int n_max() const { return n_max_; }
  const std::optional<int>& charge_sector() const { return charge_sector_; }

  std::size_t dimension() const { return entries_.size(); }
  std::size_t electron_index(std::size_t i) const { return entries_[i].electron; }
  int photons(std::size_t i) const { return entries_[i].photons; }
  const Occupation& occupation(std::size_t i) const {
    return electron_.state(entries_[i].electron);
  }
  StateLabel label(std::size_t i) const { return {occupation(i), photons(i)}; }
  int charge(std::size_t i) const;

  std::optional<std::size_t> index_of(std::size_t electron_index, int photons) const;
  std::optional<std::size_t> index_of(const StateLabel& label) const;

 private:
  struct Entry {
    std::size_t electron;
    int photons;
  };

  SymmetricElectronBasis electron_;
  int n_max_;
  std::optional<int> charge_sector_;
  std::vector<Entry> entries_;
  // row lookup, electron-major, kAbsent where the state is not in the basis
  std::vector<std::int64_t> lookup_;
};

inline constexpr std::int64_t kAbsent = -1;

std::shared_ptr<const CompositeBasis> enumerate_basis(
    int n_electrons, LadderWindow window, int n_max,
    std::optional<int> charge_sector = std::nullopt,
    std::size_t max_dimension = kDefaultMaxDimension);

}  // namespace qfel
