#pragma once

#include <Eigen/Dense>

#include <array>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pcw/basis.hpp"
#include "pcw/dielectric.hpp"
#include "pcw/lattice.hpp"
#include "pcw/parallel.hpp"

namespace pcw {

/// Even: E in plane, H along z (TE-like, z-even slab modes).
/// Odd: E along z (TM-like, z-odd slab modes).
enum class Polarization { Even, Odd };

std::string_view to_string(Polarization pol);
Polarization polarizationFromString(std::string_view name);

inline constexpr double kDefaultCutoff = 8.0;
inline constexpr int kDefaultResolution = 64;
inline constexpr int kDefaultNumBands = 8;

/// One Bloch eigenmode. `h` is the solver eigenvector (H_z for even modes,
/// the transverse H amplitude for odd modes); `e` holds the E-field Fourier
/// coefficients, one row per basis vector and columns (x, y, z), normalized
/// so that the cell integral of eps |E|^2 is 1. Modes at zero frequency carry
/// no electric field and have an all-zero `e`.
struct BlochMode {
  Vec2 k;
  int band = 0;
  Polarization polarization = Polarization::Even;
  double frequency = 0.0;
  std::shared_ptr<const PlaneWaveBasis> basis;
  Eigen::VectorXcd h;
  Eigen::MatrixXcd e;

  bool hasCoefficients() const { return basis && e.rows() == static_cast<Eigen::Index>(basis->size()); }
  bool hasField() const { return hasCoefficients() && e.norm() > 0.0; }
};

/// Maxwell operator in the plane-wave basis of `eps`:
///   even: M(G,G') = eta(G,G') (k+G).(k+G')
///   odd:  M(G,G') = |k+G| eta(G,G') |k+G'|
/// Eigenvalues are (omega a / 2 pi c)^2.
Eigen::MatrixXcd assembleOperator(const EpsilonFourier& eps, Vec2 k, Polarization pol,
                                  ExecutionPolicy policy = ExecutionPolicy::Parallel);

struct EigenSolution {
  std::vector<double> frequencies;  // reduced units a/lambda, ascending
  Eigen::MatrixXcd vectors;         // orthonormal columns
};

/// Lowest numBands eigenpairs of a Hermitian positive semidefinite operator.
/// Eigenvalues in (-1e-10, 0) are clamped to zero; anything more negative, or
/// a LAPACK failure, raises EigensolverFailure.
EigenSolution solveBands(const Eigen::MatrixXcd& op, int numBands);

/// Cell integral of eps |E|^2 for coefficient columns `e`: A * sum_c e_c^H Eps e_c.
double electricEnergy(const Eigen::MatrixXcd& e, const Eigen::MatrixXcd& epsMatrix, double cellArea);

struct KPointSolution {
  std::vector<double> frequencies;
  std::vector<BlochMode> modes;
};

/// Owns the rasterized dielectric and its spectra; solves any k-point.
/// Immutable after construction and safe to use from several threads.
class BandSolver {
 public:
  BandSolver(EpsilonGrid grid, double cutoff = kDefaultCutoff,
             FourierRule rule = FourierRule::InverseEpsMatrix, BasisLimits limits = {});

  KPointSolution solve(Vec2 k, Polarization pol, int numBands, bool retainModes = false) const;

  std::shared_ptr<const PlaneWaveBasis> basisAt(Vec2 k) const;
  EpsilonFourier fourierAt(Vec2 k) const;

  const DielectricSpectrum& spectrum() const { return *spectrum_; }
  const EpsilonGrid& grid() const { return spectrum_->grid; }
  double cutoff() const { return cutoff_; }
  FourierRule rule() const { return rule_; }
  const BasisLimits& limits() const { return limits_; }

 private:
  std::shared_ptr<const DielectricSpectrum> spectrum_;
  double cutoff_;
  FourierRule rule_;
  BasisLimits limits_;
};

struct SolverOptions {
  double cutoff = kDefaultCutoff;
  int resolution = kDefaultResolution;  // pixels per primitive period
  FourierRule rule = FourierRule::InverseEpsMatrix;
  bool retainModes = false;
  ExecutionPolicy policy = ExecutionPolicy::Parallel;
};

/// Identifies what produced a band structure.
struct BandProvenance {
  std::string structureHash;
  std::string geometryHash;
  double cutoff = 0.0;
  FourierRule rule = FourierRule::InverseEpsMatrix;
  Resolution resolution;
  double epsBackground = 0.0;
};

/// Frequencies on a k-path, one row per k-point, ascending per row.
struct BandStructure {
  Polarization polarization = Polarization::Even;
  LatticeSpec lattice;
  std::vector<Vec2> kPath;
  Eigen::MatrixXd frequencies;
  std::vector<std::vector<BlochMode>> modes;  // empty unless retained
  BandProvenance provenance;

  int numBands() const { return static_cast<int>(frequencies.cols()); }
  std::size_t numK() const { return kPath.size(); }
  std::vector<double> band(int n) const;
};

/// Solves every k-point independently (concurrently under the parallel
/// policy); row order always follows kPath.
BandStructure bandSweep(const BandSolver& solver, Polarization pol, std::span<const Vec2> kPath,
                        int numBands, bool retainModes = false,
                        ExecutionPolicy policy = ExecutionPolicy::Parallel);

BandStructure bandSweep(const StructureSpec& structure, Polarization pol,
                        std::span<const Vec2> kPath, int numBands,
                        const SolverOptions& options = {});

/// Largest |omega(k_{i+1}) - omega(k_i)| / |k_{i+1} - k_i| over bands and
/// adjacent k-points; a smoothness diagnostic.
double maxBandSlope(const BandStructure& bands);

/// Real-space Bloch field u_k(r) exp(i 2pi k.r) at pixel centres.
struct FieldGrid {
  LatticeSpec lattice;
  Resolution resolution;
  std::array<std::vector<Complex>, 3> components;

  std::size_t size() const { return components[0].size(); }
};

/// Serial policy is the plain direct sum (reference); parallel uses an
/// inverse FFT followed by an OpenMP Bloch-phase pass.
FieldGrid computeFields(const BlochMode& mode, Resolution resolution,
                        ExecutionPolicy policy = ExecutionPolicy::Parallel);

// k-space sampling helpers; all points in units 2pi/a.

/// Named high-symmetry point: Gamma, M, K (hexagonal) or Gamma, X, M (square).
Vec2 symmetryPoint(LatticeKind kind, std::string_view name);

/// Piecewise-linear path with `pointsPerSegment` samples per leg (end vertex included once).
std::vector<Vec2> interpolatePath(std::span<const Vec2> vertices, int pointsPerSegment);

/// kx = i * kxMax / (count - 1), ky = 0.
std::vector<Vec2> kxLine(int count, double kxMax = 0.5);

/// Triangular grid over the irreducible zone (boundary included) with
/// `density` subdivisions per edge.
std::vector<Vec2> irreducibleZoneSampling(LatticeKind kind, int density);

}  // namespace pcw
