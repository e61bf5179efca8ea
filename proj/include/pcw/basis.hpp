#pragma once

#include <compare>
#include <cstddef>
#include <optional>
#include <vector>

#include "pcw/lattice.hpp"

namespace pcw {

/// Reciprocal-lattice vector n1*b1 + n2*b2 by its integer coordinates.
struct GIndex {
  int n1 = 0;
  int n2 = 0;

  friend auto operator<=>(const GIndex&, const GIndex&) = default;
  friend GIndex operator-(const GIndex& a, const GIndex& b) { return {a.n1 - b.n1, a.n2 - b.n2}; }
  friend GIndex operator+(const GIndex& a, const GIndex& b) { return {a.n1 + b.n1, a.n2 + b.n2}; }
};

/// Optional caps on |n1| and |n2|. Capping n2 at 0 restricts the basis to
/// plane waves along b1 only, which is how stratified (1D) media are solved
/// without paying for the transverse direction.
struct BasisLimits {
  std::optional<int> maxAbsN1;
  std::optional<int> maxAbsN2;

  friend bool operator==(const BasisLimits&, const BasisLimits&) = default;
};

/// Plane waves exp(i 2pi (k+G).r) with |k+G| <= cutoff (units 2pi/a),
/// ordered by |k+G| and then lexicographically by (n1, n2). With k = 0 the set
/// is closed under negation; for k != 0 the basis at -k is the negated set.
class PlaneWaveBasis {
 public:
  static PlaneWaveBasis build(const LatticeSpec& lattice, Vec2 k, double cutoff,
                              const BasisLimits& limits = {});

  std::size_t size() const { return indices_.size(); }
  const std::vector<GIndex>& indices() const { return indices_; }
  const GIndex& operator[](std::size_t i) const { return indices_[i]; }
  const LatticeSpec& lattice() const { return lattice_; }
  Vec2 center() const { return center_; }
  double cutoff() const { return cutoff_; }

  /// k + G for basis element i, units 2pi/a.
  Vec2 wavevector(std::size_t i) const;

  /// Largest |n_axis| in the basis (axis 0 or 1).
  int maxAbsIndex(int axis) const;

 private:
  LatticeSpec lattice_;
  Vec2 center_;
  double cutoff_ = 0.0;
  std::vector<GIndex> indices_;
};

}  // namespace pcw
