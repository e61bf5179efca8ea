#include "pcw/phasematch.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <tuple>

#include "pcw/error.hpp"

namespace pcw {
namespace {

using Section = StitchedDispersion::Section;

std::vector<double> guideGrid(const BandStructure& bands, std::string_view name) {
  std::vector<double> grid;
  for (const Vec2& k : bands.kPath) {
    if (std::abs(k.y) > 1e-12) {
      throw Error(ErrorKind::GridMismatch, fmt::format("{} section has a k-point off the guide axis", name));
    }
    grid.push_back(k.x);
  }
  return grid;
}

std::vector<int> resolveBands(const std::vector<int>& requested, int available, std::string_view what) {
  std::vector<int> out = requested;
  if (out.empty()) {
    out.resize(static_cast<std::size_t>(available));
    std::iota(out.begin(), out.end(), 0);
  }
  for (int b : out) {
    if (b < 0 || b >= available) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("{} band {} is outside the {} computed bands", what, b, available));
    }
  }
  return out;
}

bool pumpMomentumValid(double kp, double kMax) {
  return kp > -0.5 && kp <= 0.5 && std::abs(kp) <= kMax + 1e-12;
}

void fillDerived(MatchSolution& s) {
  s.energyResidual = energyResidual(s);
  s.momentumResidual = momentumResidual(s);
  const double up = s.pump.velocity;
  const double u1 = s.signal.velocity;
  const double u2 = s.idler.velocity;
  s.dgdPumpSignal = dgd(up, u1);
  s.dgdPumpIdler = dgd(up, u2);
  s.dgdSignalIdler = dgd(u1, u2);
  s.dgdPerLength = s.degenerate ? dgd(up, u1) : dgd(up, 0.5 * (u1 + u2));
  s.counterPropagating = u1 * u2 < 0.0 || u1 * up < 0.0 || u2 * up < 0.0;
}

struct Evaluator {
  const StitchedDispersion& disp;
  const MatchOptions& options;

  // Builds and checks a candidate; nullopt when outside a window, off the
  // sampled range, or beyond tolerance.
  std::optional<MatchSolution> candidate(int pumpBand, int band1, int band2, int m, double k1,
                                         double k2) const {
    const double kp = k1 + k2 - m;
    if (!pumpMomentumValid(kp, disp.kMax())) return std::nullopt;
    const auto w1 = disp.frequency(Section::Low, band1, k1);
    const auto w2 = disp.frequency(Section::Low, band2, k2);
    const auto wp = disp.frequency(Section::High, pumpBand, kp);
    if (!w1 || !w2 || !wp) return std::nullopt;
    const auto& low = disp.window(Section::Low);
    if (!low.contains(*w1) || !low.contains(*w2) || !disp.window(Section::High).contains(*wp)) {
      return std::nullopt;
    }
    MatchSolution s;
    s.pump = {pumpBand, kp, *wp, *disp.velocity(Section::High, pumpBand, kp)};
    s.signal = {band1, k1, *w1, *disp.velocity(Section::Low, band1, k1)};
    s.idler = {band2, k2, *w2, *disp.velocity(Section::Low, band2, k2)};
    s.m = m;
    s.degenerate = band1 == band2 && (k2 == k1 || k2 == -k1);
    fillDerived(s);
    if (s.energyResidual > options.energyTol || s.momentumResidual > options.momentumTol) {
      return std::nullopt;
    }
    return s;
  }
};

bool nearDuplicate(const MatchSolution& a, const MatchSolution& b, double halfStep, double energyTol) {
  return a.pump.band == b.pump.band && a.signal.band == b.signal.band && a.idler.band == b.idler.band &&
         a.m == b.m && std::abs(a.signal.k - b.signal.k) < halfStep &&
         std::abs(a.idler.k - b.idler.k) < halfStep && std::abs(a.pump.k - b.pump.k) < halfStep &&
         std::abs(a.pump.omega - b.pump.omega) < energyTol;
}

template <typename Partition>
std::vector<MatchSolution> runPartitions(const std::vector<int>& pumpBands, const MatchOptions& options,
                                         Partition&& partition) {
  std::vector<std::pair<int, int>> parts;
  for (int p : pumpBands) {
    for (int m = options.mMin; m <= options.mMax; ++m) parts.emplace_back(p, m);
  }
  std::vector<std::vector<MatchSolution>> results(parts.size());
  const auto n = static_cast<int>(parts.size());
  if (options.policy == ExecutionPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(workerCount())
    for (int i = 0; i < n; ++i) results[i] = partition(parts[i].first, parts[i].second);
  } else {
    for (int i = 0; i < n; ++i) results[i] = partition(parts[i].first, parts[i].second);
  }
  std::vector<MatchSolution> out;
  for (auto& r : results) out.insert(out.end(), r.begin(), r.end());
  std::sort(out.begin(), out.end(), solutionLess);
  return out;
}

void checkOptions(const MatchOptions& options) {
  if (!(options.energyTol > 0.0) || !(options.momentumTol > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "match tolerances must be positive");
  }
  if (options.mMin > options.mMax) throw Error(ErrorKind::InvalidArgument, "empty m range");
}

}  // namespace

StitchedDispersion StitchedDispersion::stitch(BandStructure low, FrequencyWindow lowWindow,
                                              BandStructure high, FrequencyWindow highWindow,
                                              std::optional<double> latticeConstantNm) {
  if (!(lowWindow.lo < lowWindow.hi) || !(highWindow.lo < highWindow.hi)) {
    throw Error(ErrorKind::InvalidArgument, "validity windows must have lo < hi");
  }
  if (highWindow.lo < lowWindow.hi) {
    throw Error(ErrorKind::OverlappingWindows,
                fmt::format("high window starts at {} below the low window's end {}", highWindow.lo,
                            lowWindow.hi));
  }
  if (low.provenance.geometryHash != high.provenance.geometryHash) {
    throw Error(ErrorKind::GridMismatch,
                fmt::format("sections describe different geometries ({} vs {})",
                            low.provenance.geometryHash, high.provenance.geometryHash));
  }
  const auto gl = guideGrid(low, "low");
  const auto gh = guideGrid(high, "high");
  if (gl.size() != gh.size() ||
      !std::equal(gl.begin(), gl.end(), gh.begin(), [](double a, double b) { return std::abs(a - b) <= 1e-12; })) {
    throw Error(ErrorKind::GridMismatch, "low and high sections are sampled on different kx grids");
  }
  if (gl.size() < 3) throw Error(ErrorKind::TooFewSamples, "stitching needs at least 3 kx samples");
  if (std::abs(gl.front()) > 1e-12) throw Error(ErrorKind::GridMismatch, "kx grid must start at 0");
  const double dk = gl.back() / static_cast<double>(gl.size() - 1);
  for (std::size_t i = 0; i < gl.size(); ++i) {
    if (std::abs(gl[i] - dk * static_cast<double>(i)) > 1e-9) {
      throw Error(ErrorKind::GridMismatch, "kx grid must be uniformly spaced");
    }
  }
  if (gl.back() > 0.5 + 1e-12) throw Error(ErrorKind::GridMismatch, "kx grid extends beyond 1/2");

  StitchedDispersion d;
  d.low_ = std::move(low);
  d.high_ = std::move(high);
  d.lowWindow_ = lowWindow;
  d.highWindow_ = highWindow;
  d.a_ = latticeConstantNm;
  d.grid_ = gl;
  d.dk_ = dk;

  const bool zoneEdge = std::abs(gl.back() - 0.5) <= 1e-12;
  const auto sampled = [&](const BandStructure& bands, std::vector<std::vector<double>>& omega,
                           std::vector<std::vector<double>>& velocity) {
    const std::size_t n = gl.size();
    for (int b = 0; b < bands.numBands(); ++b) {
      std::vector<double> w = bands.band(b);
      std::vector<double> u(n);
      // Time reversal makes omega even about k = 0, and periodicity makes it
      // even about k = 1/2, so both derivatives vanish there.
      u[0] = 0.0;
      for (std::size_t i = 1; i + 1 < n; ++i) u[i] = (w[i + 1] - w[i - 1]) / (2.0 * dk);
      u[n - 1] = zoneEdge ? 0.0 : (w[n - 1] - w[n - 2]) / dk;
      omega.push_back(std::move(w));
      velocity.push_back(std::move(u));
    }
  };
  sampled(d.low_, d.lowOmega_, d.lowVelocity_);
  sampled(d.high_, d.highOmega_, d.highVelocity_);
  return d;
}

std::vector<double> StitchedDispersion::signedGrid() const {
  std::vector<double> out;
  for (std::size_t i = grid_.size() - 1; i >= 1; --i) out.push_back(-grid_[i]);
  out.insert(out.end(), grid_.begin(), grid_.end());
  return out;
}

std::optional<double> StitchedDispersion::reduce(double k) const {
  const double r = k - std::ceil(k - 0.5);
  if (std::abs(r) > kMax() + 1e-12) return std::nullopt;
  return r;
}

double StitchedDispersion::interpolate(const std::vector<double>& samples, double k) const {
  const double t = std::abs(k) / dk_;
  const double nearest = std::round(t);
  const auto last = static_cast<double>(samples.size() - 1);
  if (std::abs(t - nearest) < 1e-9) return samples[static_cast<std::size_t>(std::min(nearest, last))];
  const double base = std::min(std::floor(t), last - 1.0);
  const auto i = static_cast<std::size_t>(base);
  const double f = t - base;
  return samples[i] * (1.0 - f) + samples[i + 1] * f;
}

std::optional<double> StitchedDispersion::frequency(Section s, int band, double k) const {
  const auto r = reduce(k);
  if (!r) return std::nullopt;
  return interpolate((s == Section::Low ? lowOmega_ : highOmega_)[static_cast<std::size_t>(band)], *r);
}

std::optional<double> StitchedDispersion::velocity(Section s, int band, double k) const {
  const auto r = reduce(k);
  if (!r) return std::nullopt;
  const double u =
      interpolate((s == Section::Low ? lowVelocity_ : highVelocity_)[static_cast<std::size_t>(band)], *r);
  return *r < 0.0 ? -u : u;
}

std::optional<double> StitchedDispersion::wavelengthNm(double omega) const {
  if (!a_ || omega <= 0.0) return std::nullopt;
  return *a_ / omega;
}

std::optional<double> dgd(double uPump, double uDc) {
  if (uPump == 0.0 || uDc == 0.0) return std::nullopt;
  return std::abs(1.0 / uPump - 1.0 / uDc);
}

double dgdPsPerMm(double dgdInverseC) { return dgdInverseC * kPsPerMmPerInverseC; }

double energyResidual(const MatchSolution& s) {
  return std::abs(s.signal.omega + s.idler.omega - s.pump.omega);
}

double momentumResidual(const MatchSolution& s) {
  return std::abs(s.signal.k + s.idler.k - s.pump.k - s.m);
}

bool solutionLess(const MatchSolution& a, const MatchSolution& b) {
  return std::make_tuple(a.pump.omega, a.pump.k, a.pump.band, a.signal.band, a.idler.band, a.signal.k,
                         a.idler.k, a.m) <
         std::make_tuple(b.pump.omega, b.pump.k, b.pump.band, b.signal.band, b.idler.band, b.signal.k,
                         b.idler.k, b.m);
}

std::vector<MatchSolution> findDegenerateMatches(const StitchedDispersion& disp,
                                                 const MatchOptions& options) {
  checkOptions(options);
  const auto pumpBands = resolveBands(options.pumpBands, disp.numBands(Section::High), "pump");
  const auto dcBands = resolveBands(options.dcBands, disp.numBands(Section::Low), "down-conversion");
  const auto grid = disp.signedGrid();
  const Evaluator eval{disp, options};
  const double halfStep = 0.5 * disp.spacing();

  const auto partition = [&](int p, int m) {
    std::vector<MatchSolution> found;
    const auto emit = [&](MatchSolution s) {
      for (const auto& f : found) {
        if (nearDuplicate(f, s, halfStep, options.energyTol)) return;
      }
      found.push_back(std::move(s));
    };
    for (int d : dcBands) {
      for (const double sign : {1.0, -1.0}) {
        // mismatch(k1) = omega_p(2k1 - m) - 2 omega_d(k1) on the co-propagating
        // branch, omega_p(-m) - 2 omega_d(k1) on the counter-propagating one.
        const auto mismatch = [&](double k1) -> std::optional<double> {
          const double kp = k1 + sign * k1 - m;
          if (!pumpMomentumValid(kp, disp.kMax())) return std::nullopt;
          const auto wp = disp.frequency(Section::High, p, kp);
          const auto w1 = disp.frequency(Section::Low, d, k1);
          if (!wp || !w1) return std::nullopt;
          return *wp - 2.0 * *w1;
        };
        std::vector<std::optional<double>> f(grid.size());
        for (std::size_t i = 0; i < grid.size(); ++i) {
          f[i] = mismatch(grid[i]);
          if (!f[i]) continue;
          if (auto s = eval.candidate(p, d, d, m, grid[i], sign * grid[i])) emit(std::move(*s));
        }
        if (!options.refine) continue;
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
          if (!f[i] || !f[i + 1]) continue;
          if (std::abs(*f[i]) <= options.energyTol || std::abs(*f[i + 1]) <= options.energyTol) continue;
          if ((*f[i] < 0.0) == (*f[i + 1] < 0.0)) continue;
          double a = grid[i], b = grid[i + 1];
          const bool negativeAtA = *f[i] < 0.0;
          for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
            const double mid = 0.5 * (a + b);
            const auto fm = mismatch(mid);
            if (!fm) break;
            if ((*fm < 0.0) == negativeAtA) {
              a = mid;
            } else {
              b = mid;
            }
          }
          const double root = 0.5 * (a + b);
          if (auto s = eval.candidate(p, d, d, m, root, sign * root)) emit(std::move(*s));
        }
      }
    }
    return found;
  };
  return runPartitions(pumpBands, options, partition);
}

std::vector<MatchSolution> findNondegenerateMatches(const StitchedDispersion& disp,
                                                    const MatchOptions& options) {
  checkOptions(options);
  const auto pumpBands = resolveBands(options.pumpBands, disp.numBands(Section::High), "pump");
  const auto dcBands = resolveBands(options.dcBands, disp.numBands(Section::Low), "down-conversion");
  const auto grid = disp.signedGrid();
  const auto n = grid.size();
  const std::uint64_t work = static_cast<std::uint64_t>(n) * n * pumpBands.size() * dcBands.size() *
                             dcBands.size() * static_cast<std::uint64_t>(options.mMax - options.mMin + 1);
  if (work > options.maxEvaluations) {
    throw Error(ErrorKind::BudgetExceeded,
                fmt::format("{} evaluations exceed the configured cap of {}", work, options.maxEvaluations));
  }
  const Evaluator eval{disp, options};
  const auto& lowWin = disp.window(Section::Low);
  const auto& highWin = disp.window(Section::High);

  // Down-conversion samples on the signed grid, and their in-window extremes.
  std::vector<std::vector<double>> omega(dcBands.size(), std::vector<double>(n));
  std::vector<std::vector<bool>> inWindow(dcBands.size(), std::vector<bool>(n));
  std::vector<double> bandMin(dcBands.size(), INFINITY), bandMax(dcBands.size(), -INFINITY);
  for (std::size_t b = 0; b < dcBands.size(); ++b) {
    for (std::size_t i = 0; i < n; ++i) {
      omega[b][i] = *disp.frequency(Section::Low, dcBands[b], grid[i]);
      inWindow[b][i] = lowWin.contains(omega[b][i]);
      if (inWindow[b][i]) {
        bandMin[b] = std::min(bandMin[b], omega[b][i]);
        bandMax[b] = std::max(bandMax[b], omega[b][i]);
      }
    }
  }

  const auto partition = [&](int p, int m) {
    std::vector<MatchSolution> found;
    double pumpMin = INFINITY, pumpMax = -INFINITY;
    for (double k : disp.kGrid()) {
      const double w = *disp.frequency(Section::High, p, k);
      if (highWin.contains(w)) {
        pumpMin = std::min(pumpMin, w);
        pumpMax = std::max(pumpMax, w);
      }
    }
    if (pumpMin > pumpMax) return found;
    const double tol = options.energyTol;
    for (std::size_t b1 = 0; b1 < dcBands.size(); ++b1) {
      for (std::size_t b2 = 0; b2 < dcBands.size(); ++b2) {
        if (bandMin[b1] > bandMax[b1] || bandMin[b2] > bandMax[b2]) continue;
        if (bandMin[b1] + bandMin[b2] > pumpMax + tol || bandMax[b1] + bandMax[b2] < pumpMin - tol) continue;
        for (std::size_t i = 0; i < n; ++i) {
          if (!inWindow[b1][i]) continue;
          const double w1 = omega[b1][i];
          if (w1 + bandMin[b2] > pumpMax + tol || w1 + bandMax[b2] < pumpMin - tol) continue;
          for (std::size_t j = 0; j < n; ++j) {
            if (!inWindow[b2][j]) continue;
            const double sum = w1 + omega[b2][j];
            if (sum > pumpMax + tol || sum < pumpMin - tol) continue;
            if (auto s = eval.candidate(p, dcBands[b1], dcBands[b2], m, grid[i], grid[j])) {
              found.push_back(std::move(*s));
            }
          }
        }
      }
    }
    return found;
  };
  return runPartitions(pumpBands, options, partition);
}

}  // namespace pcw
