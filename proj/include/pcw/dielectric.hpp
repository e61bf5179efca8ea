#pragma once

#include <Eigen/Dense>

#include <complex>
#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "pcw/basis.hpp"
#include "pcw/lattice.hpp"
#include "pcw/parallel.hpp"

namespace pcw {

using Complex = std::complex<double>;

/// Mesh size over the (super)cell: n1 pixels along a1, n2 along a2.
struct Resolution {
  int n1 = 0;
  int n2 = 0;

  friend bool operator==(const Resolution&, const Resolution&) = default;
};

/// Per-period resolution for a structure: n x (n * periodsAlongA2).
Resolution meshFor(const StructureSpec& structure, int perPeriod);

/// Relative permittivity sampled at pixel midpoints of a uniform mesh.
/// Pixel (i, j) has its centre at fractional coordinates ((i+1/2)/n1, (j+1/2)/n2)
/// and is stored at j*n1 + i. `inclusion` is the area fraction of the pixel
/// covered by holes (or by the layer, for stratified media).
struct EpsilonGrid {
  LatticeSpec lattice;
  Resolution resolution;
  std::vector<double> eps;
  std::vector<double> inclusion;

  std::size_t size() const { return eps.size(); }
  double pixelArea() const;
  double meanEps() const;
  Vec2 pixelCentre(int i, int j) const;
  /// 1 where the background (nonlinear) material is, fractional at hole edges.
  std::vector<double> materialIndicator() const;
};

/// Rasterizes circular holes with area-weighted averaging of epsilon in
/// pixels cut by a hole boundary (exact circle/parallelogram overlap areas).
/// Requires at least 16 pixels per primitive period along each axis.
EpsilonGrid rasterizeDielectric(const StructureSpec& structure, Resolution resolution,
                                ExecutionPolicy policy = ExecutionPolicy::Parallel);

/// Layers normal to a1: epsLayer for fractional coordinate f1 in [0, layerFraction),
/// epsOther elsewhere, with boundary pixels area-weighted.
EpsilonGrid rasterizeStratified(const LatticeSpec& lattice, Resolution resolution,
                                double layerFraction, double epsLayer, double epsOther);

/// Area of the intersection of a disc (centre at the origin) with a convex
/// polygon given counter-clockwise or clockwise.
double discPolygonOverlap(std::span<const Vec2> polygon, double radius);

/// Fourier coefficients of a real mesh function,
///   f(Q) = 1/(n1 n2) sum_pixels f(r) exp(-i 2pi Q.r),
/// available for any integer Q (half-pixel phase included, no wrap-around).
class GridSpectrum {
 public:
  GridSpectrum() = default;
  GridSpectrum(Resolution resolution, std::span<const double> values);

  Complex at(int q1, int q2) const;
  Complex at(const GIndex& q) const { return at(q.n1, q.n2); }
  Resolution resolution() const { return resolution_; }

  /// Re-synthesizes the mesh values from the stored coefficients.
  std::vector<double> synthesize() const;

 private:
  Resolution resolution_;
  int halfWidth_ = 0;
  std::vector<Complex> half_;  // r2c layout: n2 rows of (n1/2 + 1)
};

/// Plain O(N^2) evaluation of the same coefficient; the serial reference for GridSpectrum.
Complex referenceCoefficient(Resolution resolution, std::span<const double> values, int q1, int q2);

/// Spectra of eps and 1/eps for one grid.
struct DielectricSpectrum {
  EpsilonGrid grid;
  GridSpectrum eps;
  GridSpectrum inverseEps;

  static std::shared_ptr<const DielectricSpectrum> compute(EpsilonGrid grid);
};

enum class FourierRule { DirectEta, InverseEpsMatrix };

std::string_view to_string(FourierRule rule);
FourierRule fourierRuleFromString(std::string_view name);

/// eps(G - G') and the inverse-permittivity operator eta(G, G') on one basis.
/// InverseEpsMatrix: eta is the matrix inverse of the truncated eps matrix.
/// DirectEta: eta(G, G') is the Fourier coefficient of 1/eps at G - G'.
struct EpsilonFourier {
  std::shared_ptr<const PlaneWaveBasis> basis;
  FourierRule rule = FourierRule::InverseEpsMatrix;
  Eigen::MatrixXcd epsMatrix;
  Eigen::MatrixXcd etaMatrix;
};

/// Throws AliasingRisk when the mesh has fewer than 2 x (plane waves per
/// dimension) pixels along either axis.
void checkAliasing(Resolution resolution, const PlaneWaveBasis& basis);

/// Hermitian Toeplitz-style matrix M(a, b) = spectrum(G_a - G_b).
Eigen::MatrixXcd convolutionMatrix(const GridSpectrum& spectrum, const PlaneWaveBasis& basis);

EpsilonFourier fourierCoefficients(const DielectricSpectrum& spectrum,
                                   std::shared_ptr<const PlaneWaveBasis> basis,
                                   FourierRule rule = FourierRule::InverseEpsMatrix);

}  // namespace pcw
