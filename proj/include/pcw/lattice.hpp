#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcw/vec2.hpp"

namespace pcw {

enum class LatticeKind { Hexagonal, Square, Supercell };

std::string_view to_string(LatticeKind kind);
LatticeKind latticeKindFromString(std::string_view name);

/// Bravais lattice in the plane. a1, a2 are in units of a; b1, b2 carry the
/// 2*pi factor so that a_i . b_j = 2*pi delta_ij.
struct LatticeSpec {
  LatticeKind kind = LatticeKind::Square;
  Vec2 a1{1.0, 0.0};
  Vec2 a2{0.0, 1.0};
  Vec2 b1{};
  Vec2 b2{};

  double cellArea() const;

  /// n1*b1 + n2*b2 expressed in units of 2*pi/a.
  Vec2 reciprocal(int n1, int n2) const;

  /// Real-space point at fractional coordinates (f1, f2).
  Vec2 point(double f1, double f2) const { return a1 * f1 + a2 * f2; }

  /// Components of a reduced wavevector along the real-space basis,
  /// (q . a1, q . a2); integers exactly when q is a reciprocal vector.
  std::array<double, 2> reciprocalCoordinates(const Vec2& q) const;

  /// Returns k minus the nearest reciprocal vector (Wigner-Seitz reduction).
  /// Points on a zone boundary are left where they are.
  Vec2 reduceToFirstZone(const Vec2& k) const;
};

/// Lattice from explicit basis vectors; the reciprocal vectors are derived.
LatticeSpec latticeFromBasis(LatticeKind kind, Vec2 a1, Vec2 a2);

/// Primitive hexagonal (a1=(1,0), a2=(1/2, sqrt3/2)) or square lattice.
LatticeSpec buildLattice(LatticeKind kind);

/// Largest admissible hole radius in units of a.
double packingLimit(LatticeKind kind);

/// Line defect: a number of removed hole rows running along x. widthScale
/// stretches the spacing between the two cladding rows adjacent to the defect.
struct DefectSpec {
  int missingRows = 1;
  double widthScale = 1.0;

  friend bool operator==(const DefectSpec&, const DefectSpec&) = default;
};

/// Holey dielectric: circular inclusions of epsHole in a background of
/// epsBackground. A primitive structure has one hole at the origin; a
/// supercell (see makeSupercell) lists every hole centre in its cell.
struct StructureSpec {
  LatticeSpec lattice;
  LatticeKind baseKind = LatticeKind::Hexagonal;
  double holeRadius = 0.0;
  double epsBackground = 1.0;
  double epsHole = 1.0;
  std::optional<DefectSpec> defect;
  int supercellRows = 1;
  std::vector<Vec2> holes;
  /// Number of primitive periods spanned by a2 of this cell; 1 for primitive cells.
  int periodsAlongA2 = 1;

  bool isSupercell() const { return lattice.kind == LatticeKind::Supercell; }
};

/// Validated primitive structure (no defect).
StructureSpec perfectCrystal(LatticeKind kind, double holeRadius, double epsBackground,
                             double epsHole = 1.0);

/// Throws InvalidArgument (or CladdingTooThin) when an invariant is violated.
void validate(const StructureSpec& structure);

/// Builds the defect supercell: period a along x, supercellRows hole rows
/// transversally, with defect->missingRows rows removed from the middle.
/// missingRows = 0 produces a folded perfect crystal.
StructureSpec makeSupercell(const StructureSpec& structure);

/// The same structure with the hole radius replaced (primitive cells only).
StructureSpec withRadius(const StructureSpec& structure, double holeRadius);

/// FNV-1a hash over every field, and over the geometry only (no dielectric
/// constants). Stitched dispersions must share the geometry hash.
std::uint64_t structureHash(const StructureSpec& structure);
std::uint64_t geometryHash(const StructureSpec& structure);
std::string hashString(std::uint64_t hash);

/// FNV-1a over arbitrary bytes.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 1469598103934665603ull);

}  // namespace pcw
