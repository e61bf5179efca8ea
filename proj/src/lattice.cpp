#include "pcw/lattice.hpp"

#include <fmt/format.h>

#include <cmath>
#include <numbers>

#include "pcw/error.hpp"

namespace pcw {

std::string_view to_string(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::Hexagonal: return "hexagonal";
    case LatticeKind::Square: return "square";
    case LatticeKind::Supercell: return "supercell";
  }
  return "unknown";
}

LatticeKind latticeKindFromString(std::string_view name) {
  if (name == "hexagonal") return LatticeKind::Hexagonal;
  if (name == "square") return LatticeKind::Square;
  if (name == "supercell") return LatticeKind::Supercell;
  throw Error(ErrorKind::InvalidArgument, fmt::format("unknown lattice kind '{}'", name));
}

double LatticeSpec::cellArea() const { return std::abs(cross(a1, a2)); }

Vec2 LatticeSpec::reciprocal(int n1, int n2) const {
  constexpr double inv2pi = 0.5 / std::numbers::pi;
  return (b1 * static_cast<double>(n1) + b2 * static_cast<double>(n2)) * inv2pi;
}

std::array<double, 2> LatticeSpec::reciprocalCoordinates(const Vec2& q) const {
  return {dot(q, a1), dot(q, a2)};
}

Vec2 LatticeSpec::reduceToFirstZone(const Vec2& k) const {
  const auto c = reciprocalCoordinates(k);
  const int c1 = static_cast<int>(std::lround(c[0]));
  const int c2 = static_cast<int>(std::lround(c[1]));
  Vec2 best = k;
  double bestNorm = norm(k);
  for (int n1 = c1 - 2; n1 <= c1 + 2; ++n1) {
    for (int n2 = c2 - 2; n2 <= c2 + 2; ++n2) {
      const Vec2 candidate = k - reciprocal(n1, n2);
      const double d = norm(candidate);
      if (d < bestNorm - 1e-12) {
        best = candidate;
        bestNorm = d;
      }
    }
  }
  return best;
}

LatticeSpec latticeFromBasis(LatticeKind kind, Vec2 a1, Vec2 a2) {
  const double area = cross(a1, a2);
  if (std::abs(area) <= 0.0 || !std::isfinite(area)) {
    throw Error(ErrorKind::InvalidArgument, "degenerate lattice basis");
  }
  constexpr double twoPi = 2.0 * std::numbers::pi;
  LatticeSpec lattice;
  lattice.kind = kind;
  lattice.a1 = a1;
  lattice.a2 = a2;
  lattice.b1 = Vec2{a2.y, -a2.x} * (twoPi / area);
  lattice.b2 = Vec2{-a1.y, a1.x} * (twoPi / area);
  return lattice;
}

LatticeSpec buildLattice(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::Hexagonal:
      return latticeFromBasis(kind, {1.0, 0.0}, {0.5, 0.5 * std::numbers::sqrt3});
    case LatticeKind::Square:
      return latticeFromBasis(kind, {1.0, 0.0}, {0.0, 1.0});
    case LatticeKind::Supercell:
      break;
  }
  throw Error(ErrorKind::InvalidArgument, "buildLattice expects hexagonal or square");
}

double packingLimit(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::Hexagonal: return 1.0 / std::numbers::sqrt3;
    case LatticeKind::Square: return 0.5;
    case LatticeKind::Supercell: break;
  }
  throw Error(ErrorKind::InvalidArgument, "packing limit is defined for primitive lattices only");
}

void validate(const StructureSpec& s) {
  if (s.baseKind == LatticeKind::Supercell) {
    throw Error(ErrorKind::InvalidArgument, "base lattice must be hexagonal or square");
  }
  if (!(s.holeRadius >= 0.0) || s.holeRadius >= packingLimit(s.baseKind)) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("hole radius {} outside [0, {:.6f}) (exceeds packing limit)",
                            s.holeRadius, packingLimit(s.baseKind)));
  }
  if (!(s.epsBackground >= 1.0) || !(s.epsHole >= 1.0)) {
    throw Error(ErrorKind::InvalidArgument, "dielectric constants must be >= 1");
  }
  if (s.supercellRows < 1) {
    throw Error(ErrorKind::InvalidArgument, "supercell_rows must be positive");
  }
  if (s.defect) {
    if (s.defect->missingRows < 0) {
      throw Error(ErrorKind::InvalidArgument, "missing_rows must be non-negative");
    }
    if (!(s.defect->widthScale > 0.0)) {
      throw Error(ErrorKind::InvalidArgument, "width_scale must be positive");
    }
    if (s.defect->missingRows >= 1 && s.supercellRows < s.defect->missingRows + 4) {
      throw Error(ErrorKind::CladdingTooThin,
                  fmt::format("{} missing rows need at least {} supercell rows, got {}",
                              s.defect->missingRows, s.defect->missingRows + 4,
                              s.supercellRows));
    }
  }
}

StructureSpec perfectCrystal(LatticeKind kind, double holeRadius, double epsBackground,
                             double epsHole) {
  StructureSpec s;
  s.lattice = buildLattice(kind);
  s.baseKind = kind;
  s.holeRadius = holeRadius;
  s.epsBackground = epsBackground;
  s.epsHole = epsHole;
  s.holes = {Vec2{0.0, 0.0}};
  validate(s);
  return s;
}

StructureSpec makeSupercell(const StructureSpec& structure) {
  if (!structure.defect) {
    throw Error(ErrorKind::InvalidArgument, "makeSupercell requires a defect description");
  }
  if (structure.isSupercell()) {
    throw Error(ErrorKind::InvalidArgument, "structure is already a supercell");
  }
  validate(structure);

  const DefectSpec defect = *structure.defect;
  const int rows = structure.supercellRows;
  const LatticeSpec primitive = buildLattice(structure.baseKind);
  const double rowSpacing = primitive.a2.y;

  const int firstMissing = (rows - defect.missingRows) / 2;
  const int endMissing = firstMissing + defect.missingRows;
  const double extra = defect.missingRows > 0
                           ? (defect.widthScale - 1.0) * (defect.missingRows + 1) * rowSpacing
                           : 0.0;

  StructureSpec out = structure;
  out.lattice = latticeFromBasis(LatticeKind::Supercell, primitive.a1,
                                 primitive.a2 * static_cast<double>(rows) + Vec2{0.0, extra});
  out.periodsAlongA2 = rows;
  out.holes.clear();
  for (int j = 0; j < rows; ++j) {
    if (j >= firstMissing && j < endMissing) continue;
    Vec2 centre = primitive.a2 * static_cast<double>(j);
    centre.x -= std::floor(centre.x);
    if (j >= endMissing) centre.y += extra;
    out.holes.push_back(centre);
  }
  return out;
}

StructureSpec withRadius(const StructureSpec& structure, double holeRadius) {
  StructureSpec out = structure;
  out.holeRadius = holeRadius;
  validate(out);
  return out;
}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace {

std::string geometryKey(const StructureSpec& s) {
  std::string key = fmt::format("{}|{}|{:.17g}|{:.17g},{:.17g},{:.17g},{:.17g}|{}",
                                to_string(s.lattice.kind), to_string(s.baseKind), s.holeRadius,
                                s.lattice.a1.x, s.lattice.a1.y, s.lattice.a2.x, s.lattice.a2.y,
                                s.supercellRows);
  if (s.defect) {
    key += fmt::format("|defect:{}:{:.17g}", s.defect->missingRows, s.defect->widthScale);
  }
  for (const Vec2& h : s.holes) key += fmt::format("|{:.17g},{:.17g}", h.x, h.y);
  return key;
}

}  // namespace

std::uint64_t geometryHash(const StructureSpec& s) { return fnv1a(geometryKey(s)); }

std::uint64_t structureHash(const StructureSpec& s) {
  return fnv1a(geometryKey(s) + fmt::format("|eps:{:.17g},{:.17g}", s.epsBackground, s.epsHole));
}

std::string hashString(std::uint64_t hash) { return fmt::format("{:016x}", hash); }

}  // namespace pcw
