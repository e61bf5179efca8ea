#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "pcw/solver.hpp"

namespace pcw {

/// Closed frequency interval [lo, hi].
struct Interval {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double w, double tol = 0.0) const { return w >= lo - tol && w <= hi + tol; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

inline constexpr double kMergeTolerance = 1e-6;

/// Sorts and unions intervals; neighbours closer than `tol` are joined.
std::vector<Interval> mergeIntervals(std::vector<Interval> intervals, double tol = kMergeTolerance);

/// Allowed frequencies of the perfect crystal at each guide wavevector kx,
/// obtained by sweeping the transverse wavevector over a full period.
struct ProjectedBands {
  LatticeKind lattice = LatticeKind::Hexagonal;
  Polarization polarization = Polarization::Even;
  std::vector<double> kxGrid;
  std::vector<std::vector<Interval>> allowed;  // per kx: disjoint, ascending
  double lightLineIndex = 1.0;
  bool masked = false;  // set by lightConeMask
  int transverseSamples = 0;

  double lightLine(std::size_t i) const { return kxGrid[i] / lightLineIndex; }
  bool aboveLightLine(std::size_t i, double omega) const { return omega > lightLine(i); }
  /// Highest frequency covered by the computed bands at kx index i.
  double ceiling(std::size_t i) const { return allowed[i].empty() ? 0.0 : allowed[i].back().hi; }
};

/// Transverse reciprocal period along ky for a primitive lattice with a1 along x.
double transversePeriod(LatticeKind kind);

/// Projects the bands of a perfect primitive crystal onto kx. Transverse
/// samples are ky = j * P / transverseSamples, j = 0..transverseSamples-1, so
/// doubling the count refines the previous sample set.
ProjectedBands projectBands(const StructureSpec& structure, Polarization pol,
                            std::span<const double> kxGrid, int transverseSamples, int numBands,
                            const SolverOptions& options = {});

/// Records the light line omega = kx / surroundIndex; everything above it is
/// radiative. Intervals are left untouched.
ProjectedBands lightConeMask(ProjectedBands pb, double surroundIndex = 1.0);

/// Gaps between consecutive bands: (max_k band n, min_k band n+1) where positive.
std::vector<Interval> findGaps(const BandStructure& bands);

/// findGaps on an irreducible-zone sampling of the given density, repeated
/// at twice the density; raises InsufficientKSampling when any edge moves by
/// more than 1% or the gap count changes. Returns the finer result.
std::vector<Interval> findGapsChecked(const StructureSpec& structure, Polarization pol,
                                      int zoneDensity, int numBands,
                                      const SolverOptions& options = {});

struct GapMapEntry {
  double radius = 0.0;
  std::vector<Interval> gaps;
};

struct GapMap {
  Polarization polarization = Polarization::Even;
  std::vector<GapMapEntry> entries;  // ascending radius
};

/// One findGaps run per radius over the irreducible zone of `structure`'s lattice.
GapMap gapMap(const StructureSpec& structure, std::span<const double> radii, Polarization pol,
              int zoneDensity, int numBands, const SolverOptions& options = {},
              bool checkSampling = false);

enum class ModeLabel { GapGuided, IndexGuided, Leaky, Extended };

std::string_view to_string(ModeLabel label);

struct ClassifiedMode {
  std::size_t kIndex = 0;
  double kx = 0.0;
  int band = 0;
  double omega = 0.0;
  ModeLabel label = ModeLabel::Extended;
};

struct DefectModeClassification {
  std::vector<ClassifiedMode> modes;  // kx-major, then band
};

/// Labels every (kx, band) of a supercell band structure against the
/// projection: leaky above the light line, extended inside an allowed
/// interval or above the computed ceiling, index-guided below the lowest
/// interval, gap-guided otherwise. Defect k-points must lie on pb's kx grid
/// with ky = 0.
DefectModeClassification classifyDefectModes(const BandStructure& defectBands,
                                              const ProjectedBands& pb,
                                              double tol = kMergeTolerance);

/// d omega / d k on a uniform grid of spacing dk; central differences inside,
/// one-sided at the ends. Units of c.
std::vector<double> groupVelocity(std::span<const double> omega, double dk);

/// Same, taking the sample positions; they must be uniformly spaced.
std::vector<double> groupVelocity(std::span<const double> k, std::span<const double> omega);

}  // namespace pcw
