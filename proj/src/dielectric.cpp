#include "pcw/dielectric.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <fftw3.h>
#include <fmt/format.h>
#include <lapacke.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <numeric>

#include "pcw/error.hpp"

namespace pcw {
namespace {

// FFTW planning is not thread-safe.
std::mutex& fftwPlannerMutex() {
  static std::mutex m;
  return m;
}

int wrap(int q, int n) {
  const int r = q % n;
  return r < 0 ? r + n : r;
}

// Signed area of (disc at origin) intersected with triangle (origin, a, b).
double discTriangleOverlap(Vec2 a, Vec2 b, double radius) {
  const double r2 = radius * radius;
  const auto sector = [r2](Vec2 u, Vec2 v) { return 0.5 * r2 * std::atan2(cross(u, v), dot(u, v)); };
  const double aa = dot(a, a);
  const double bb = dot(b, b);
  if (aa <= r2 && bb <= r2) return 0.5 * cross(a, b);
  const Vec2 d = b - a;
  const double dd = dot(d, d);
  if (dd == 0.0) return 0.0;
  const double ad = dot(a, d);
  const double disc = ad * ad - dd * (aa - r2);
  if (disc <= 0.0) return sector(a, b);
  const double s = std::sqrt(disc);
  const double t1 = (-ad - s) / dd;
  const double t2 = (-ad + s) / dd;
  if (t2 <= 0.0 || t1 >= 1.0) return sector(a, b);
  const Vec2 p1 = a + d * std::max(t1, 0.0);
  const Vec2 p2 = a + d * std::min(t2, 1.0);
  return sector(a, p1) + 0.5 * cross(p1, p2) + sector(p2, b);
}

void checkResolution(const StructureSpec& s, Resolution res) {
  if (res.n1 < 16 || res.n2 < 16 * s.periodsAlongA2) {
    throw Error(ErrorKind::ResolutionTooLow,
                fmt::format("need at least 16 pixels per period, got {}x{} for {} period(s) along a2",
                            res.n1, res.n2, s.periodsAlongA2));
  }
}

// Inclusion fraction of one pixel given every hole centre. Supercells are
// strongly skewed, so images are picked around the nearest one: the a2 image
// from the fractional coordinate, then the a1 images along the remaining offset.
double pixelInclusion(const StructureSpec& s, Resolution res, const Vec2& centre,
                      const std::array<Vec2, 4>& cornerOffsets, double halfDiagonal) {
  const double r = s.holeRadius;
  const double pixelArea = s.lattice.cellArea() / (static_cast<double>(res.n1) * res.n2);
  const double a1Length2 = dot(s.lattice.a1, s.lattice.a1);
  constexpr double inv2pi = 0.5 / std::numbers::pi;
  double covered = 0.0;
  for (const Vec2& hole : s.holes) {
    const Vec2 rel0 = centre - hole;
    const int c2 = static_cast<int>(std::lround(dot(rel0, s.lattice.b2) * inv2pi));
    for (int m2 = c2 - 1; m2 <= c2 + 1; ++m2) {
      const Vec2 row = rel0 - s.lattice.a2 * static_cast<double>(m2);
      const int c1 = static_cast<int>(std::lround(dot(row, s.lattice.a1) / a1Length2));
      for (int m1 = c1 - 1; m1 <= c1 + 1; ++m1) {
        const Vec2 rel = row - s.lattice.a1 * static_cast<double>(m1);
        const double d = norm(rel);
        if (d >= r + halfDiagonal) continue;
        if (d + halfDiagonal <= r) {
          covered += pixelArea;
          continue;
        }
        std::array<Vec2, 4> poly;
        for (int c = 0; c < 4; ++c) poly[c] = rel + cornerOffsets[c];
        covered += discPolygonOverlap(poly, r);
      }
    }
  }
  return std::clamp(covered / pixelArea, 0.0, 1.0);
}

}  // namespace

Resolution meshFor(const StructureSpec& structure, int perPeriod) {
  return {perPeriod, perPeriod * structure.periodsAlongA2};
}

double EpsilonGrid::pixelArea() const {
  return lattice.cellArea() / (static_cast<double>(resolution.n1) * resolution.n2);
}

double EpsilonGrid::meanEps() const {
  return std::accumulate(eps.begin(), eps.end(), 0.0) / static_cast<double>(eps.size());
}

Vec2 EpsilonGrid::pixelCentre(int i, int j) const {
  return lattice.point((i + 0.5) / resolution.n1, (j + 0.5) / resolution.n2);
}

std::vector<double> EpsilonGrid::materialIndicator() const {
  std::vector<double> out(inclusion.size());
  std::transform(inclusion.begin(), inclusion.end(), out.begin(), [](double f) { return 1.0 - f; });
  return out;
}

double discPolygonOverlap(std::span<const Vec2> polygon, double radius) {
  if (radius <= 0.0 || polygon.size() < 3) return 0.0;
  double area = 0.0;
  for (std::size_t i = 0; i < polygon.size(); ++i) {
    area += discTriangleOverlap(polygon[i], polygon[(i + 1) % polygon.size()], radius);
  }
  return std::abs(area);
}

EpsilonGrid rasterizeDielectric(const StructureSpec& s, Resolution res, ExecutionPolicy policy) {
  checkResolution(s, res);
  EpsilonGrid grid;
  grid.lattice = s.lattice;
  grid.resolution = res;
  const std::size_t total = static_cast<std::size_t>(res.n1) * res.n2;
  grid.eps.assign(total, s.epsBackground);
  grid.inclusion.assign(total, 0.0);
  if (s.holeRadius <= 0.0 || s.holes.empty()) return grid;

  const Vec2 h1 = s.lattice.a1 * (0.5 / res.n1);
  const Vec2 h2 = s.lattice.a2 * (0.5 / res.n2);
  const std::array<Vec2, 4> corners{-h1 - h2, h1 - h2, h1 + h2, -h1 + h2};
  const double halfDiagonal = std::max(norm(h1 + h2), norm(h1 - h2));
  const double contrast = s.epsHole - s.epsBackground;

  const auto row = [&](int j) {
    for (int i = 0; i < res.n1; ++i) {
      const std::size_t idx = static_cast<std::size_t>(j) * res.n1 + i;
      const double f = pixelInclusion(s, res, grid.pixelCentre(i, j), corners, halfDiagonal);
      grid.inclusion[idx] = f;
      grid.eps[idx] = s.epsBackground + f * contrast;
    }
  };

  if (policy == ExecutionPolicy::Parallel) {
#pragma omp parallel for schedule(static) num_threads(workerCount())
    for (int j = 0; j < res.n2; ++j) row(j);
  } else {
    for (int j = 0; j < res.n2; ++j) row(j);
  }
  return grid;
}

EpsilonGrid rasterizeStratified(const LatticeSpec& lattice, Resolution res, double layerFraction,
                                double epsLayer, double epsOther) {
  if (res.n1 < 16 || res.n2 < 16) {
    throw Error(ErrorKind::ResolutionTooLow, "need at least 16 pixels per period");
  }
  if (!(layerFraction >= 0.0 && layerFraction <= 1.0) || epsLayer < 1.0 || epsOther < 1.0) {
    throw Error(ErrorKind::InvalidArgument, "invalid stratified medium");
  }
  EpsilonGrid grid;
  grid.lattice = lattice;
  grid.resolution = res;
  grid.eps.resize(static_cast<std::size_t>(res.n1) * res.n2);
  grid.inclusion.resize(grid.eps.size());
  for (int i = 0; i < res.n1; ++i) {
    const double lo = static_cast<double>(i) / res.n1;
    const double hi = static_cast<double>(i + 1) / res.n1;
    const double f = std::clamp((std::min(hi, layerFraction) - lo) * res.n1, 0.0, 1.0);
    for (int j = 0; j < res.n2; ++j) {
      const std::size_t idx = static_cast<std::size_t>(j) * res.n1 + i;
      grid.inclusion[idx] = f;
      grid.eps[idx] = epsOther + f * (epsLayer - epsOther);
    }
  }
  return grid;
}

GridSpectrum::GridSpectrum(Resolution resolution, std::span<const double> values)
    : resolution_(resolution), halfWidth_(resolution.n1 / 2 + 1) {
  const std::size_t total = static_cast<std::size_t>(resolution.n1) * resolution.n2;
  if (values.size() != total) {
    throw Error(ErrorKind::InvalidArgument, "grid size does not match resolution");
  }
  std::vector<double> in(values.begin(), values.end());
  half_.resize(static_cast<std::size_t>(resolution.n2) * halfWidth_);
  fftw_plan plan;
  {
    std::lock_guard lock(fftwPlannerMutex());
    plan = fftw_plan_dft_r2c_2d(resolution.n2, resolution.n1, in.data(),
                                reinterpret_cast<fftw_complex*>(half_.data()), FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftwPlannerMutex());
    fftw_destroy_plan(plan);
  }
  const double scale = 1.0 / static_cast<double>(total);
  for (auto& c : half_) c *= scale;
}

Complex GridSpectrum::at(int q1, int q2) const {
  const int n1 = resolution_.n1;
  const int n2 = resolution_.n2;
  const int w1 = wrap(q1, n1);
  const int w2 = wrap(q2, n2);
  Complex c;
  if (w1 < halfWidth_) {
    c = half_[static_cast<std::size_t>(w2) * halfWidth_ + w1];
  } else {
    c = std::conj(half_[static_cast<std::size_t>(wrap(-w2, n2)) * halfWidth_ + (n1 - w1)]);
  }
  const double phase = -std::numbers::pi * (static_cast<double>(q1) / n1 + static_cast<double>(q2) / n2);
  return c * Complex(std::cos(phase), std::sin(phase));
}

std::vector<double> GridSpectrum::synthesize() const {
  const std::size_t total = static_cast<std::size_t>(resolution_.n1) * resolution_.n2;
  std::vector<Complex> work(half_);
  std::vector<double> out(total);
  fftw_plan plan;
  {
    std::lock_guard lock(fftwPlannerMutex());
    plan = fftw_plan_dft_c2r_2d(resolution_.n2, resolution_.n1,
                                reinterpret_cast<fftw_complex*>(work.data()), out.data(),
                                FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(fftwPlannerMutex());
    fftw_destroy_plan(plan);
  }
  return out;
}

Complex referenceCoefficient(Resolution res, std::span<const double> values, int q1, int q2) {
  Complex sum = 0.0;
  for (int j = 0; j < res.n2; ++j) {
    for (int i = 0; i < res.n1; ++i) {
      const double phase = -2.0 * std::numbers::pi *
                           (q1 * (i + 0.5) / res.n1 + q2 * (j + 0.5) / res.n2);
      sum += values[static_cast<std::size_t>(j) * res.n1 + i] *
             Complex(std::cos(phase), std::sin(phase));
    }
  }
  return sum / (static_cast<double>(res.n1) * res.n2);
}

std::shared_ptr<const DielectricSpectrum> DielectricSpectrum::compute(EpsilonGrid grid) {
  auto out = std::make_shared<DielectricSpectrum>();
  std::vector<double> inverse(grid.eps.size());
  std::transform(grid.eps.begin(), grid.eps.end(), inverse.begin(), [](double e) { return 1.0 / e; });
  out->eps = GridSpectrum(grid.resolution, grid.eps);
  out->inverseEps = GridSpectrum(grid.resolution, inverse);
  out->grid = std::move(grid);
  return out;
}

std::string_view to_string(FourierRule rule) {
  return rule == FourierRule::DirectEta ? "direct-eta" : "inverse-eps-matrix";
}

FourierRule fourierRuleFromString(std::string_view name) {
  if (name == "direct-eta") return FourierRule::DirectEta;
  if (name == "inverse-eps-matrix") return FourierRule::InverseEpsMatrix;
  throw Error(ErrorKind::InvalidArgument, fmt::format("unknown Fourier rule '{}'", name));
}

void checkAliasing(Resolution res, const PlaneWaveBasis& basis) {
  const int need1 = 2 * (2 * basis.maxAbsIndex(0) + 1);
  const int need2 = 2 * (2 * basis.maxAbsIndex(1) + 1);
  if (res.n1 < need1 || res.n2 < need2) {
    throw Error(ErrorKind::AliasingRisk,
                fmt::format("mesh {}x{} too coarse for the plane-wave basis, need at least {}x{}",
                            res.n1, res.n2, need1, need2));
  }
}

Eigen::MatrixXcd convolutionMatrix(const GridSpectrum& spectrum, const PlaneWaveBasis& basis) {
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd m(n, n);
#pragma omp parallel for schedule(dynamic, 16) num_threads(workerCount())
  for (Eigen::Index b = 0; b < n; ++b) {
    for (Eigen::Index a = 0; a < b; ++a) {
      const Complex c = spectrum.at(basis[a] - basis[b]);
      m(a, b) = c;
      m(b, a) = std::conj(c);
    }
    m(b, b) = Complex(spectrum.at(0, 0).real(), 0.0);
  }
  return m;
}

EpsilonFourier fourierCoefficients(const DielectricSpectrum& spectrum,
                                   std::shared_ptr<const PlaneWaveBasis> basis, FourierRule rule) {
  checkAliasing(spectrum.grid.resolution, *basis);
  EpsilonFourier out;
  out.rule = rule;
  out.epsMatrix = convolutionMatrix(spectrum.eps, *basis);
  if (rule == FourierRule::DirectEta) {
    out.etaMatrix = convolutionMatrix(spectrum.inverseEps, *basis);
  } else {
    const auto n = static_cast<lapack_int>(basis->size());
    Eigen::MatrixXcd inv = out.epsMatrix;
    lapack_int info = LAPACKE_zpotrf(LAPACK_COL_MAJOR, 'U', n, inv.data(), n);
    if (info == 0) info = LAPACKE_zpotri(LAPACK_COL_MAJOR, 'U', n, inv.data(), n);
    if (info != 0) {
      throw Error(ErrorKind::InvalidArgument,
                  fmt::format("eps matrix is not positive definite (LAPACK info {})", info));
    }
    for (lapack_int b = 0; b < n; ++b) {
      inv(b, b) = Complex(inv(b, b).real(), 0.0);
      for (lapack_int a = 0; a < b; ++a) inv(b, a) = std::conj(inv(a, b));
    }
    out.etaMatrix = std::move(inv);
  }
  out.basis = std::move(basis);
  return out;
}

}  // namespace pcw
