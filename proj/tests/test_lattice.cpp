#include "doctest.h"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "pcw/basis.hpp"
#include "pcw/error.hpp"
#include "pcw/lattice.hpp"

using namespace pcw;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void checkDuality(const LatticeSpec& l) {
  const Vec2 a[2] = {l.a1, l.a2};
  const Vec2 b[2] = {l.b1, l.b2};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      CHECK(std::abs(dot(a[i], b[j]) - (i == j ? kTwoPi : 0.0)) < 1e-12);
    }
  }
}

StructureSpec defected(LatticeKind kind, int rows, int missing, double width = 1.0) {
  StructureSpec s = perfectCrystal(kind, 0.3, 13.0);
  s.defect = DefectSpec{missing, width};
  s.supercellRows = rows;
  return s;
}

}  // namespace

TEST_CASE("primitive lattices satisfy a.b = 2pi delta") {
  checkDuality(buildLattice(LatticeKind::Hexagonal));
  checkDuality(buildLattice(LatticeKind::Square));
  const auto hex = buildLattice(LatticeKind::Hexagonal);
  CHECK(hex.a2.x == doctest::Approx(0.5));
  CHECK(hex.a2.y == doctest::Approx(std::sqrt(3.0) / 2.0));
  CHECK(hex.cellArea() == doctest::Approx(std::sqrt(3.0) / 2.0));
}

TEST_CASE("supercell lattices satisfy duality") {
  for (auto kind : {LatticeKind::Hexagonal, LatticeKind::Square}) {
    for (int rows : {5, 7, 8, 11}) {
      for (double width : {0.8, 1.0, 1.3}) {
        checkDuality(makeSupercell(defected(kind, rows, 1, width)).lattice);
      }
    }
  }
}

TEST_CASE("reciprocal coordinates of reciprocal vectors are integers") {
  const auto l = buildLattice(LatticeKind::Hexagonal);
  for (int n1 = -3; n1 <= 3; ++n1) {
    for (int n2 = -3; n2 <= 3; ++n2) {
      const auto c = l.reciprocalCoordinates(l.reciprocal(n1, n2));
      CHECK(std::abs(c[0] - n1) < 1e-12);
      CHECK(std::abs(c[1] - n2) < 1e-12);
    }
  }
}

TEST_CASE("zone reduction") {
  const auto l = buildLattice(LatticeKind::Square);
  const Vec2 r = l.reduceToFirstZone({1.2, -0.9});
  CHECK(r.x == doctest::Approx(0.2));
  CHECK(r.y == doctest::Approx(0.1));
  const Vec2 edge = l.reduceToFirstZone({0.5, 0.0});
  CHECK(edge.x == doctest::Approx(0.5));
}

TEST_CASE("validation") {
  CHECK_THROWS_AS(perfectCrystal(LatticeKind::Hexagonal, 0.6, 13.0), Error);
  CHECK_THROWS_AS(perfectCrystal(LatticeKind::Square, 0.5, 13.0), Error);
  CHECK_NOTHROW(perfectCrystal(LatticeKind::Square, 0.49, 13.0));
  CHECK_THROWS_AS(perfectCrystal(LatticeKind::Square, 0.2, 0.5), Error);
  CHECK_THROWS_AS(perfectCrystal(LatticeKind::Square, -0.1, 13.0), Error);
  try {
    perfectCrystal(LatticeKind::Hexagonal, 0.7, 13.0);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::InvalidArgument);
    CHECK(std::string(e.what()).find("exceeds packing limit") != std::string::npos);
  }
}

TEST_CASE("cladding must be thick enough") {
  try {
    makeSupercell(defected(LatticeKind::Hexagonal, 4, 1));
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CladdingTooThin);
  }
  CHECK_NOTHROW(makeSupercell(defected(LatticeKind::Hexagonal, 5, 1)));
  CHECK_THROWS_AS(makeSupercell(perfectCrystal(LatticeKind::Hexagonal, 0.3, 13.0)), Error);
}

TEST_CASE("supercell hole layout") {
  const auto full = makeSupercell(defected(LatticeKind::Hexagonal, 8, 0));
  CHECK(full.holes.size() == 8);
  CHECK(full.lattice.a2.y == doctest::Approx(8 * std::sqrt(3.0) / 2.0));
  const auto w1 = makeSupercell(defected(LatticeKind::Hexagonal, 8, 1));
  CHECK(w1.holes.size() == 7);
  CHECK(w1.periodsAlongA2 == 8);
  for (const Vec2& h : w1.holes) {
    CHECK(h.x >= 0.0);
    CHECK(h.x < 1.0);
  }
  // Widening the defect moves the upper cladding and lengthens the cell.
  const auto wide = makeSupercell(defected(LatticeKind::Hexagonal, 8, 1, 1.2));
  const double extra = 0.2 * 2 * std::sqrt(3.0) / 2.0;
  CHECK(wide.lattice.a2.y == doctest::Approx(w1.lattice.a2.y + extra));
  CHECK(wide.holes.back().y == doctest::Approx(w1.holes.back().y + extra));
  CHECK(wide.holes.front().y == doctest::Approx(w1.holes.front().y));
}

TEST_CASE("hashes separate geometry from dielectric constants") {
  const auto a = perfectCrystal(LatticeKind::Hexagonal, 0.38, 13.0);
  const auto b = perfectCrystal(LatticeKind::Hexagonal, 0.38, 10.8);
  const auto c = perfectCrystal(LatticeKind::Hexagonal, 0.37, 13.0);
  CHECK(geometryHash(a) == geometryHash(b));
  CHECK(structureHash(a) != structureHash(b));
  CHECK(geometryHash(a) != geometryHash(c));
  CHECK(hashString(geometryHash(a)).size() == 16);
}

TEST_CASE("basis respects the cutoff and ordering") {
  const auto l = buildLattice(LatticeKind::Hexagonal);
  const Vec2 k{0.13, 0.07};
  const auto basis = PlaneWaveBasis::build(l, k, 4.0);
  double previous = -1.0;
  std::set<GIndex> seen;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const double q = norm(basis.wavevector(i));
    CHECK(q <= 4.0 * (1.0 + 1e-9));
    CHECK(q >= previous - 1e-9);
    previous = q;
    CHECK(seen.insert(basis[i]).second);
  }
  // Brute-force count of lattice points inside the sphere.
  std::size_t expected = 0;
  for (int n1 = -20; n1 <= 20; ++n1) {
    for (int n2 = -20; n2 <= 20; ++n2) {
      if (norm(k + l.reciprocal(n1, n2)) <= 4.0) ++expected;
    }
  }
  CHECK(basis.size() == expected);
}

TEST_CASE("basis at k = 0 is closed under negation; basis at -k is the negated set") {
  const auto l = buildLattice(LatticeKind::Hexagonal);
  const auto b0 = PlaneWaveBasis::build(l, {0.0, 0.0}, 5.0);
  std::set<GIndex> s0(b0.indices().begin(), b0.indices().end());
  for (const auto& g : b0.indices()) CHECK(s0.count(GIndex{-g.n1, -g.n2}) == 1);

  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int t = 0; t < 10; ++t) {
    const Vec2 k{u(rng), u(rng)};
    const auto plus = PlaneWaveBasis::build(l, k, 5.0);
    const auto minus = PlaneWaveBasis::build(l, -k, 5.0);
    REQUIRE(plus.size() == minus.size());
    std::set<GIndex> sm(minus.indices().begin(), minus.indices().end());
    for (const auto& g : plus.indices()) CHECK(sm.count(GIndex{-g.n1, -g.n2}) == 1);
  }
}

TEST_CASE("basis limits cap the index range") {
  const auto l = buildLattice(LatticeKind::Square);
  const auto b = PlaneWaveBasis::build(l, {0.5, 0.0}, 10.0, BasisLimits{std::nullopt, 0});
  CHECK(b.maxAbsIndex(1) == 0);
  CHECK(b.size() == 20);
  CHECK_THROWS_AS(PlaneWaveBasis::build(l, {0.0, 0.0}, 0.0), Error);
}
