#include <cmath>
#include <random>
#include <sstream>

#include "doctest.h"
#include "qfel/errors.hpp"
#include "qfel/ladder_basis.hpp"
#include "qfel/ladder_operators.hpp"
#include "qfel/operator_expression.hpp"

using namespace qfel;

namespace {

std::size_t row_of(const CompositeBasis& b, Occupation m, int n) {
  const auto i = b.index_of(StateLabel{std::move(m), n});
  REQUIRE(i.has_value());
  return *i;
}

// Symmetric N-particle states written out over the L^N product space of
// distinguishable particles, then Sum_i |mu><nu|_i applied explicitly.
struct DistinguishableOracle {
  int n_particles;
  int levels;
  int mu_min;

  std::size_t configs() const {
    std::size_t c = 1;
    for (int i = 0; i < n_particles; ++i) c *= static_cast<std::size_t>(levels);
    return c;
  }
  std::vector<int> decode(std::size_t k) const {
    std::vector<int> out(static_cast<std::size_t>(n_particles));
    for (auto& x : out) {
      x = static_cast<int>(k % static_cast<std::size_t>(levels));
      k /= static_cast<std::size_t>(levels);
    }
    return out;
  }
  std::size_t encode(const std::vector<int>& c) const {
    std::size_t k = 0;
    for (auto it = c.rbegin(); it != c.rend(); ++it) k = k * static_cast<std::size_t>(levels) + static_cast<std::size_t>(*it);
    return k;
  }
  Eigen::VectorXd symmetric(const Occupation& m) const {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(configs()));
    for (std::size_t k = 0; k < configs(); ++k) {
      Occupation counts(static_cast<std::size_t>(levels), 0);
      for (int x : decode(k)) ++counts[static_cast<std::size_t>(x)];
      if (counts == m) v[static_cast<Eigen::Index>(k)] = 1.0;
    }
    return v / v.norm();
  }
  Eigen::VectorXd jump(int mu, int nu, const Eigen::VectorXd& v) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(v.size());
    for (std::size_t k = 0; k < configs(); ++k) {
      const double amp = v[static_cast<Eigen::Index>(k)];
      if (amp == 0.0) continue;
      auto c = decode(k);
      for (auto& x : c) {
        if (x != nu - mu_min) continue;
        x = mu - mu_min;
        out[static_cast<Eigen::Index>(encode(c))] += amp;
        x = nu - mu_min;
      }
    }
    return out;
  }
};

}  // namespace

TEST_CASE("basis enumeration examples") {
  const auto b1 = enumerate_basis(1, LadderWindow(0, 1), 1);
  REQUIRE(b1->dimension() == 4);
  CHECK(b1->occupation(0) == Occupation{1, 0});
  CHECK(b1->photons(0) == 0);
  CHECK(b1->photons(1) == 1);
  CHECK(b1->occupation(2) == Occupation{0, 1});

  const auto b2 = enumerate_basis(2, LadderWindow(0, 1), 0);
  REQUIRE(b2->dimension() == 3);
  CHECK(b2->occupation(0) == Occupation{2, 0});
  CHECK(b2->occupation(1) == Occupation{1, 1});
  CHECK(b2->occupation(2) == Occupation{0, 2});
}

TEST_CASE("sector dimension matches brute-force filtering") {
  const LadderWindow w(-1, 2);
  const auto b = enumerate_basis(8, w, 16, 0);
  std::size_t count = 0;
  for (int a = 0; a <= 8; ++a)
    for (int c0 = 0; a + c0 <= 8; ++c0)
      for (int c1 = 0; a + c0 + c1 <= 8; ++c1) {
        const int c2 = 8 - a - c0 - c1;
        const int moment = -a + c1 + 2 * c2;
        for (int n = 0; n <= 16; ++n) count += (n - moment == 0);
      }
  CHECK(b->dimension() == count);
  for (std::size_t i = 0; i < b->dimension(); ++i) CHECK(b->charge(i) == 0);
}

TEST_CASE("electron state count is stars and bars") {
  for (int n = 1; n <= 6; ++n) {
    for (int span = 2; span <= 6; ++span) {
      const SymmetricElectronBasis e(n, LadderWindow(1 - span + 1, 1));
      double expected = 1.0;
      for (int k = 1; k <= span - 1; ++k) expected = expected * (n + k) / k;
      CHECK(e.size() == static_cast<std::size_t>(std::lround(expected)));
      for (const auto& s : e.states()) {
        int total = 0;
        for (int x : s) total += x;
        CHECK(total == n);
      }
      for (std::size_t i = 1; i < e.size(); ++i) CHECK(e.state(i - 1) > e.state(i));
    }
  }
}

TEST_CASE("basis index is a bijection") {
  const auto b = enumerate_basis(3, LadderWindow(-2, 2), 4, 1);
  for (std::size_t i = 0; i < b->dimension(); ++i) {
    const auto j = b->index_of(b->label(i));
    REQUIRE(j.has_value());
    CHECK(*j == i);
  }
  CHECK_FALSE(b->index_of(StateLabel{{3, 0, 0, 0, 0}, 0}).has_value());
}

TEST_CASE("basis errors") {
  CHECK_THROWS_AS(LadderWindow(1, 2), DomainError);
  CHECK_THROWS_AS(LadderWindow(-2, 0), DomainError);
  CHECK_THROWS_AS(enumerate_basis(0, LadderWindow(0, 1), 2), DomainError);
  CHECK_THROWS_AS(enumerate_basis(1, LadderWindow(0, 1), -1), DomainError);
  CHECK_THROWS_AS(enumerate_basis(8, LadderWindow(-3, 4), 10, std::nullopt, 1000), CapacityError);
  CHECK_THROWS_AS(enumerate_basis(8, LadderWindow(-3, 4), 10, 0, 10), CapacityError);
  try {
    enumerate_basis(40, LadderWindow(-10, 10), 4, std::nullopt, 1000);
    FAIL("expected capacity error");
  } catch (const CapacityError& e) {
    CHECK(std::string(e.what()).find("cap is 1000") != std::string::npos);
  }
}

TEST_CASE("max dimension from environment") {
  setenv("QFEL_MAX_DIM", "1234", 1);
  CHECK(max_dimension_from_env() == 1234);
  setenv("QFEL_MAX_DIM", "garbage", 1);
  CHECK(max_dimension_from_env() == kDefaultMaxDimension);
  unsetenv("QFEL_MAX_DIM");
  CHECK(max_dimension_from_env() == kDefaultMaxDimension);
}

TEST_CASE("single electron jump") {
  const auto b = enumerate_basis(1, LadderWindow(0, 1), 0);
  const auto y10 = collective_jump(*b, 1, 0);
  CHECK(std::abs(y10.coeff(row_of(*b, {0, 1}, 0), row_of(*b, {1, 0}, 0)) - 1.0) < 1e-15);
  CHECK(y10.nnz() == 1);
}

TEST_CASE("two electron jumps reproduce entangled superpositions") {
  const auto b = enumerate_basis(2, LadderWindow(0, 2), 0);
  const auto y10 = collective_jump(*b, 1, 0);
  const auto y21 = collective_jump(*b, 2, 1);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(b->dimension()));
  psi[static_cast<Eigen::Index>(row_of(*b, {2, 0, 0}, 0))] = 1.0;

  const Eigen::VectorXcd once = y10.apply(psi);
  CHECK(std::abs(once[static_cast<Eigen::Index>(row_of(*b, {1, 1, 0}, 0))] - std::sqrt(2.0)) < 1e-14);
  CHECK(once.squaredNorm() == doctest::Approx(2.0).epsilon(1e-14));

  const Eigen::VectorXcd twice = y21.apply(once);
  CHECK(std::abs(twice[static_cast<Eigen::Index>(row_of(*b, {1, 0, 1}, 0))] - std::sqrt(2.0)) < 1e-14);
  CHECK(twice.squaredNorm() == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("jump amplitudes match distinguishable-particle construction") {
  for (int n = 1; n <= 3; ++n) {
    const LadderWindow w(-1, 1);
    const auto b = enumerate_basis(n, w, 0);
    const DistinguishableOracle oracle{n, w.size(), w.mu_min()};
    std::vector<Eigen::VectorXd> sym;
    for (std::size_t i = 0; i < b->dimension(); ++i) sym.push_back(oracle.symmetric(b->occupation(i)));
    for (int mu = -1; mu <= 1; ++mu) {
      for (int nu = -1; nu <= 1; ++nu) {
        const auto y = collective_jump(*b, mu, nu).to_dense();
        for (std::size_t j = 0; j < b->dimension(); ++j) {
          const Eigen::VectorXd image = oracle.jump(mu, nu, sym[j]);
          for (std::size_t i = 0; i < b->dimension(); ++i) {
            const double expected = sym[i].dot(image);
            CHECK(std::abs(y(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - expected) < 1e-13);
          }
        }
      }
    }
  }
}

TEST_CASE("jump index outside window is a domain error") {
  const auto b = enumerate_basis(2, LadderWindow(0, 1), 1);
  CHECK_THROWS_AS(collective_jump(*b, 2, 0), DomainError);
  CHECK_THROWS_AS(collective_jump(*b, 0, -1), DomainError);
}

TEST_CASE("photon operators") {
  const auto b = enumerate_basis(1, LadderWindow(0, 1), 6);
  const auto a = photon_operator(*b, PhotonKind::annihilate);
  const auto ad = photon_operator(*b, PhotonKind::create);
  const auto n = photon_operator(*b, PhotonKind::number);

  const std::size_t vac = row_of(*b, {1, 0}, 0);
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(b->dimension()));
  e[static_cast<Eigen::Index>(vac)] = 1.0;
  CHECK(a.apply(e).norm() == 0.0);

  const std::size_t five = row_of(*b, {1, 0}, 5);
  CHECK(n.coeff(five, five) == cplx(5.0, 0.0));
  CHECK(max_abs_difference(ad, a.adjoint()) == 0.0);

  const auto comm = commutator(a, ad);
  for (std::size_t i = 0; i < b->dimension(); ++i) {
    const double expected = b->photons(i) < b->n_max() ? 1.0 : -static_cast<double>(b->n_max());
    CHECK(std::abs(comm.coeff(i, i) - expected) < 1e-14);
  }
  CHECK(max_abs_difference(ad * a, n) < 1e-14);
}

TEST_CASE("inversion commutator identity") {
  const auto b = enumerate_basis(3, LadderWindow(-1, 2), 1);
  const auto lhs = commutator(collective_jump(*b, 0, 1), collective_jump(*b, 1, 0));
  CHECK(max_abs_difference(lhs, inversion_operator(*b)) < 1e-14);
  const auto y = collective_jump(*b, 2, -1);
  CHECK(commutator(y, y).nnz() == 0);
}

TEST_CASE("commutator identity on random quadruples") {
  std::mt19937 rng(20240917u);
  for (int n = 1; n <= 6; ++n) {
    const LadderWindow w(-1, 2);
    const auto b = enumerate_basis(n, w, 0);
    std::uniform_int_distribution<int> pick(w.mu_min(), w.mu_max());
    for (int trial = 0; trial < 40; ++trial) {
      const int mu = pick(rng), nu = pick(rng), rho = pick(rng), eta = pick(rng);
      const auto lhs = commutator(collective_jump(*b, mu, nu), collective_jump(*b, rho, eta));
      SparseOperator rhs(b->dimension());
      if (nu == rho) rhs += collective_jump(*b, mu, eta);
      if (eta == mu) rhs -= collective_jump(*b, rho, nu);
      CHECK(max_abs_difference(lhs, rhs) <= 1e-13);
    }
  }
}

TEST_CASE("adjoint of a jump is the reversed jump") {
  const auto b = enumerate_basis(4, LadderWindow(-2, 2), 2);
  for (int mu = -2; mu <= 2; ++mu)
    for (int nu = -2; nu <= 2; ++nu)
      CHECK(max_abs_difference(collective_jump(*b, mu, nu).adjoint(), collective_jump(*b, nu, mu)) == 0.0);
}

TEST_CASE("single electron products follow projector algebra, two electrons do not") {
  auto defect = [](int n) {
    const LadderWindow w(-1, 2);
    const auto b = enumerate_basis(n, w, 0);
    double worst = 0.0;
    for (int mu = -1; mu <= 2; ++mu)
      for (int nu = -1; nu <= 2; ++nu)
        for (int rho = -1; rho <= 2; ++rho)
          for (int eta = -1; eta <= 2; ++eta) {
            const auto lhs = collective_jump(*b, mu, nu) * collective_jump(*b, rho, eta);
            const auto rhs = nu == rho ? collective_jump(*b, mu, eta) : SparseOperator(b->dimension());
            worst = std::max(worst, max_abs_difference(lhs, rhs));
          }
    return worst;
  };
  CHECK(defect(1) < 1e-14);
  CHECK(defect(2) > 0.5);
}

TEST_CASE("charge operator") {
  const auto b = enumerate_basis(3, LadderWindow(-1, 2), 3);
  const auto c = charge_operator(*b);
  const std::size_t ground = row_of(*b, {0, 3, 0, 0}, 0);
  CHECK(c.coeff(ground, ground) == cplx(0.0, 0.0));

  const auto step = photon_operator(*b, PhotonKind::create) * collective_jump(*b, 1, 0);
  Eigen::VectorXcd psi = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(b->dimension()));
  psi[static_cast<Eigen::Index>(ground)] = 1.0;
  const Eigen::VectorXcd out = step.apply(psi);
  const std::size_t reached = row_of(*b, {0, 2, 1, 0}, 1);
  CHECK(std::abs(out[static_cast<Eigen::Index>(reached)]) > 0.0);
  CHECK(c.coeff(reached, reached) == cplx(0.0, 0.0));
}

TEST_CASE("sector products keep intermediates outside the sector") {
  const LadderWindow w(-1, 2);
  const auto full = enumerate_basis(2, w, 4);
  const auto sector = enumerate_basis(2, w, 4, 0);
  const Expression e = Expression::annihilate() * Expression::jump(0, 1) +
                       Expression::create() * Expression::jump(1, 0) * Expression::number();
  const auto on_full = e.on(*full).to_dense();
  const auto on_sector = e.on(*sector);
  for (std::size_t i = 0; i < sector->dimension(); ++i) {
    const auto fi = *full->index_of(sector->label(i));
    for (std::size_t j = 0; j < sector->dimension(); ++j) {
      const auto fj = *full->index_of(sector->label(j));
      CHECK(std::abs(on_sector.coeff(i, j) - on_full(static_cast<Eigen::Index>(fi), static_cast<Eigen::Index>(fj))) < 1e-14);
    }
  }
  // matrix products on the sector lose the intermediate state
  const auto naive = photon_operator(*sector, PhotonKind::annihilate) * collective_jump(*sector, 0, 1);
  CHECK(naive.nnz() == 0);
  CHECK(on_sector.nnz() > 0);
}

TEST_CASE("expression adjoint matches matrix adjoint") {
  const auto b = enumerate_basis(2, LadderWindow(-1, 2), 3);
  const Expression e = cplx(0.3, 0.7) * Expression::annihilate() * Expression::jump(-1, 2) * Expression::jump(0, 1) +
                       cplx(-1.1, 0.2) * Expression::number() * Expression::jump(2, 0);
  CHECK(max_abs_difference(e.adjoint().on(*b), e.on(*b).adjoint()) < 1e-14);
  CHECK(commutator(e, e).empty());
}

TEST_CASE("sparse operator storage") {
  const std::vector<MatrixEntry> entries{{0, 1, {1.0, 2.0}}, {0, 1, {0.5, -2.0}}, {2, 2, {1e-17, 0.0}}};
  const SparseOperator op(3, entries);
  CHECK(op.nnz() == 1);
  CHECK(op.coeff(0, 1) == cplx(1.5, 0.0));
  CHECK(op.adjoint().coeff(1, 0) == cplx(1.5, 0.0));
  CHECK_THROWS_AS(SparseOperator(2, std::vector<MatrixEntry>{{2, 0, 1.0}}), DomainError);
  CHECK_THROWS_AS(commutator(SparseOperator(2), SparseOperator(3)), DomainError);
}

TEST_CASE("operator dump round trip") {
  const auto b = enumerate_basis(2, LadderWindow(-1, 2), 2);
  const auto op = cplx(0.25, -1.0 / 3.0) * collective_jump(*b, 2, -1) * photon_operator(*b, PhotonKind::annihilate) +
                  inversion_operator(*b);
  std::stringstream ss;
  write_operator(ss, op);
  const std::string text = ss.str();
  CHECK(text.rfind(std::to_string(b->dimension()) + " " + std::to_string(op.nnz()) + "\n", 0) == 0);
  const auto back = read_operator(ss);
  CHECK(max_abs_difference(op, back) == 0.0);
  std::stringstream bad("4 2\n0 0 1 0\n");
  CHECK_THROWS_AS(read_operator(bad), DomainError);
}
