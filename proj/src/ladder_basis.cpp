#include "qfel/ladder_basis.hpp"

#include <cstdlib>
#include <limits>
#include <string>

#include <fmt/format.h>

#include "qfel/errors.hpp"

namespace qfel {

namespace {

// binomial(n, k) saturating at max() on overflow
std::size_t saturating_binomial(std::size_t n, std::size_t k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  std::size_t result = 1;
  for (std::size_t i = 1; i <= k; ++i) {
    const std::size_t factor = n - k + i;
    if (result > std::numeric_limits<std::size_t>::max() / factor) {
      return std::numeric_limits<std::size_t>::max();
    }
    // exact: result * factor is divisible by i at every step
    result = result * factor / i;
  }
  return result;
}

void enumerate_occupations(int remaining, std::size_t slot, Occupation& current,
                           std::vector<Occupation>& out) {
  if (slot + 1 == current.size()) {
    current[slot] = remaining;
    out.push_back(current);
    return;
  }
  for (int m = remaining; m >= 0; --m) {
    current[slot] = m;
    enumerate_occupations(remaining - m, slot + 1, current, out);
  }
}

}  // namespace

std::size_t max_dimension_from_env() {
  const char* raw = std::getenv("QFEL_MAX_DIM");
  if (raw == nullptr || *raw == '\0') return kDefaultMaxDimension;
  char* end = nullptr;
  const unsigned long long value = std::strtoull(raw, &end, 10);
  if (end == raw || *end != '\0' || value == 0) return kDefaultMaxDimension;
  return static_cast<std::size_t>(value);
}

LadderWindow::LadderWindow(int mu_min, int mu_max) : mu_min_(mu_min), mu_max_(mu_max) {
  if (mu_min > 0 || mu_max < 1) {
    throw DomainError(fmt::format(
        "ladder window [{}, {}] must contain the resonant levels 0 and 1", mu_min, mu_max));
  }
}

SymmetricElectronBasis::SymmetricElectronBasis(int n_electrons, LadderWindow window,
                                               std::size_t max_states)
    : n_electrons_(n_electrons), window_(window) {
  if (n_electrons < 1) {
    throw DomainError(fmt::format("electron number must be positive, got {}", n_electrons));
  }
  const auto levels = static_cast<std::size_t>(window.size());
  const std::size_t count =
      saturating_binomial(static_cast<std::size_t>(n_electrons) + levels - 1, levels - 1);
  if (count > max_states) {
    throw CapacityError(fmt::format(
        "symmetric electron basis for N={} on {} levels has {} states, cap is {}",
        n_electrons, levels, count, max_states));
  }
  states_.reserve(count);
  Occupation scratch(levels, 0);
  enumerate_occupations(n_electrons, 0, scratch, states_);
  for (std::size_t i = 0; i < states_.size(); ++i) index_.emplace(states_[i], i);
}

std::optional<std::size_t> SymmetricElectronBasis::index_of(const Occupation& m) const {
  const auto it = index_.find(m);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

int SymmetricElectronBasis::ladder_moment(const Occupation& m) const {
  int moment = 0;
  for (std::size_t s = 0; s < m.size(); ++s) {
    moment += (window_.mu_min() + static_cast<int>(s)) * m[s];
  }
  return moment;
}

CompositeBasis::CompositeBasis(SymmetricElectronBasis electron, int n_max,
                               std::optional<int> charge_sector, std::size_t max_dimension)
    : electron_(std::move(electron)), n_max_(n_max), charge_sector_(charge_sector) {
  if (n_max < 0) {
    throw DomainError(fmt::format("photon cutoff must be nonnegative, got {}", n_max));
  }
  const std::size_t photon_states = static_cast<std::size_t>(n_max) + 1;
  if (!charge_sector && electron_.size() > max_dimension / photon_states) {
    throw CapacityError(fmt::format(
        "composite basis has {} x {} states, cap is {}", electron_.size(), photon_states,
        max_dimension));
  }
  lookup_.assign(electron_.size() * photon_states, kAbsent);
  for (std::size_t e = 0; e < electron_.size(); ++e) {
    const int moment = electron_.ladder_moment(electron_.state(e));
    for (int n = 0; n <= n_max; ++n) {
      if (charge_sector && n - moment != *charge_sector) continue;
      if (entries_.size() >= max_dimension) {
        throw CapacityError(fmt::format("composite basis exceeds the cap of {} states",
                                        max_dimension));
      }
      lookup_[e * photon_states + static_cast<std::size_t>(n)] =
          static_cast<std::int64_t>(entries_.size());
      entries_.push_back({e, n});
    }
  }
}

int CompositeBasis::charge(std::size_t i) const {
  return photons(i) - electron_.ladder_moment(occupation(i));
}

std::optional<std::size_t> CompositeBasis::index_of(std::size_t electron_index,
                                                    int photons) const {
  if (photons < 0 || photons > n_max_ || electron_index >= electron_.size()) {
    return std::nullopt;
  }
  const auto row =
      lookup_[electron_index * (static_cast<std::size_t>(n_max_) + 1) +
              static_cast<std::size_t>(photons)];
  if (row == kAbsent) return std::nullopt;
  return static_cast<std::size_t>(row);
}

std::optional<std::size_t> CompositeBasis::index_of(const StateLabel& label) const {
  const auto e = electron_.index_of(label.occupation);
  if (!e) return std::nullopt;
  return index_of(*e, label.photons);
}

std::shared_ptr<const CompositeBasis> enumerate_basis(int n_electrons, LadderWindow window,
                                                      int n_max,
                                                      std::optional<int> charge_sector,
                                                      std::size_t max_dimension) {
  return std::make_shared<const CompositeBasis>(
      SymmetricElectronBasis(n_electrons, window, max_dimension), n_max, charge_sector,
      max_dimension);
}

}  // namespace qfel
