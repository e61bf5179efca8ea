#pragma once

#include "pcw/solver.hpp"

namespace pcw {

/// Scalar stand-in for the chi(2) tensor: weight times the material
/// indicator (1 in the background dielectric, 0 in holes, fractional on
/// boundary pixels).
struct NonlinearRegion {
  LatticeSpec lattice;
  Resolution resolution;
  std::vector<double> indicator;
  double scalarWeight = 1.0;
  GridSpectrum spectrum;

  static NonlinearRegion fromGrid(const EpsilonGrid& grid, double scalarWeight = 1.0);
  /// Indicator supplied directly (values in [0, 1]).
  static NonlinearRegion fromIndicator(const LatticeSpec& lattice, Resolution resolution,
                                       std::vector<double> indicator, double scalarWeight = 1.0);
};

struct OverlapResult {
  Complex value;
  double magnitude = 0.0;
  double phase = 0.0;
  bool momentumConserved = false;
  GIndex shift;  // k_s + k_i - k_p as a reciprocal vector
};

/// Rescales E (and h) so that the cell integral of eps |E|^2 is 1, using the
/// eps matrix of the mode's own basis. Throws ZeroVector for a mode without field.
BlochMode normalizeMode(const BlochMode& mode, const DielectricSpectrum& spectrum);

/// Cell integral of eps |E|^2 in coefficient space.
double modeEnergy(const BlochMode& mode, const DielectricSpectrum& spectrum);

/// O = w * int chi(r) conj(E_p) E_s E_i dA with the component contraction
///   odd pump:  conj(E_p,z) (E_s,x E_i,x + E_s,y E_i,y)
///   even pump: conj(sum_c E_p,c) (sum_c E_s,c) (sum_c E_i,c)
/// Requires k_s + k_i - k_p to be a reciprocal vector of the common cell
/// (MomentumMismatch otherwise). The serial policy is real-space midpoint
/// quadrature on the region's mesh; the parallel policy contracts Fourier
/// coefficients against the indicator spectrum. The two agree to roundoff.
OverlapResult overlapIntegral(const BlochMode& pump, const BlochMode& signal, const BlochMode& idler,
                              const NonlinearRegion& region,
                              ExecutionPolicy policy = ExecutionPolicy::Parallel);

/// Real-space midpoint quadrature of the same integrand (the serial path).
OverlapResult overlapQuadrature(const BlochMode& pump, const BlochMode& signal, const BlochMode& idler,
                                const NonlinearRegion& region);

/// Coefficient-space evaluation (the parallel path).
OverlapResult overlapCoefficients(const BlochMode& pump, const BlochMode& signal, const BlochMode& idler,
                                  const NonlinearRegion& region);

}  // namespace pcw
