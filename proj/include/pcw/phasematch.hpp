#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "pcw/solver.hpp"

namespace pcw {

inline constexpr double kDefaultEnergyTol = 1e-4;
inline constexpr double kDefaultMomentumTol = 1e-9;

/// 1/c expressed in ps/mm.
inline constexpr double kPsPerMmPerInverseC = 3.3356409519815204;

struct FrequencyWindow {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double w) const { return w >= lo && w <= hi; }
};

/// Guide-axis bands from two dielectric constants. The low section serves the
/// down-converted (signal, idler) frequencies, the high section the pump.
/// Both must be sampled on the same uniform kx grid starting at 0; bands are
/// extended to negative k by time reversal and to |k| > 1/2 by periodicity.
class StitchedDispersion {
 public:
  enum class Section { Low, High };

  static StitchedDispersion stitch(BandStructure low, FrequencyWindow lowWindow, BandStructure high,
                                   FrequencyWindow highWindow,
                                   std::optional<double> latticeConstantNm = std::nullopt);

  const BandStructure& bands(Section s) const { return s == Section::Low ? low_ : high_; }
  const FrequencyWindow& window(Section s) const { return s == Section::Low ? lowWindow_ : highWindow_; }
  int numBands(Section s) const { return bands(s).numBands(); }
  const std::vector<double>& kGrid() const { return grid_; }
  double spacing() const { return dk_; }
  double kMax() const { return grid_.back(); }
  std::optional<double> latticeConstantNm() const { return a_; }

  /// Signed grid: -kMax..kMax, each magnitude once per sign.
  std::vector<double> signedGrid() const;

  /// k mapped into (-1/2, 1/2]; nullopt when |k| exceeds the sampled range.
  std::optional<double> reduce(double k) const;

  /// Piecewise-linear omega and group velocity at any k (after reduction).
  std::optional<double> frequency(Section s, int band, double k) const;
  std::optional<double> velocity(Section s, int band, double k) const;

  /// Vacuum wavelength a / omega in nm; nullopt without a lattice constant or at omega = 0.
  std::optional<double> wavelengthNm(double omega) const;

 private:
  double interpolate(const std::vector<double>& samples, double k) const;

  BandStructure low_, high_;
  FrequencyWindow lowWindow_, highWindow_;
  std::optional<double> a_;
  std::vector<double> grid_;
  double dk_ = 0.0;
  // Per section and band: omega and velocity samples on grid_.
  std::vector<std::vector<double>> lowOmega_, highOmega_, lowVelocity_, highVelocity_;
};

/// |1/uPump - 1/uDc| in units of 1/c; nullopt (infinite) when either velocity is zero.
std::optional<double> dgd(double uPump, double uDc);

/// dgd value converted to ps/mm.
double dgdPsPerMm(double dgdInverseC);

struct ModePoint {
  int band = 0;
  double k = 0.0;
  double omega = 0.0;
  double velocity = 0.0;
};

struct MatchSolution {
  ModePoint pump, signal, idler;
  int m = 0;  // G = m * 2pi/a along the guide
  double energyResidual = 0.0;
  double momentumResidual = 0.0;
  bool degenerate = false;
  /// Main figure: pump against the down-converted velocity (signal velocity
  /// in the degenerate case, the signal/idler mean otherwise).
  std::optional<double> dgdPerLength;
  std::optional<double> dgdPumpSignal, dgdPumpIdler, dgdSignalIdler;
  bool counterPropagating = false;
  std::optional<double> overlapMagnitude;
  std::optional<double> overlapPhase;
};

double energyResidual(const MatchSolution& s);
double momentumResidual(const MatchSolution& s);

struct MatchOptions {
  double energyTol = kDefaultEnergyTol;
  double momentumTol = kDefaultMomentumTol;
  int mMin = -2;
  int mMax = 2;
  std::vector<int> pumpBands;  // empty: all bands of the high section
  std::vector<int> dcBands;    // empty: all bands of the low section
  /// Degenerate scan: also bisect for roots between grid samples.
  bool refine = true;
  /// Nondegenerate scan: maximum (k1, k2, band triple, m) evaluations.
  std::uint64_t maxEvaluations = 500'000'000;
  ExecutionPolicy policy = ExecutionPolicy::Parallel;
};

/// Signal and idler share band and frequency; k2 = k1 (co-propagating) or
/// k2 = -k1 (counter-propagating pair), k1 over the signed grid. Solutions
/// are grid points meeting the energy tolerance plus, with refine, bisected
/// roots of omega_p(k1 + k2 - m) - 2 omega_1(k1) between grid samples.
std::vector<MatchSolution> findDegenerateMatches(const StitchedDispersion& disp,
                                                 const MatchOptions& options = {});

/// Every (k1, k2) on signed grid x signed grid and every ordered pair of
/// down-conversion bands; kp = k1 + k2 - m. Grid points only.
std::vector<MatchSolution> findNondegenerateMatches(const StitchedDispersion& disp,
                                                    const MatchOptions& options = {});

/// Deterministic total order: omega_p, k_p, band indices, then k1, k2, m.
bool solutionLess(const MatchSolution& a, const MatchSolution& b);

}  // namespace pcw
