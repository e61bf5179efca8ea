#include "pcw/solver.hpp"

#define lapack_complex_float std::complex<float>
#define lapack_complex_double std::complex<double>
#include <fftw3.h>
#include <fmt/format.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>

#include "pcw/error.hpp"

namespace pcw {
namespace {

std::mutex& fftwPlannerMutex() {
  static std::mutex m;
  return m;
}

int wrap(int q, int n) {
  const int r = q % n;
  return r < 0 ? r + n : r;
}

Complex unitPhase(double turns) {
  const double a = 2.0 * std::numbers::pi * turns;
  return {std::cos(a), std::sin(a)};
}

// E-field coefficients (before normalization) from the H eigenvector:
// D ~ curl H, E = eta D.
Eigen::MatrixXcd electricCoefficients(const EpsilonFourier& eps, Polarization pol,
                                      const Eigen::VectorXcd& h) {
  const auto& basis = *eps.basis;
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd e = Eigen::MatrixXcd::Zero(n, 3);
  if (pol == Polarization::Even) {
    Eigen::VectorXcd dx(n), dy(n);
    for (Eigen::Index a = 0; a < n; ++a) {
      const Vec2 q = basis.wavevector(static_cast<std::size_t>(a));
      dx(a) = h(a) * q.y;
      dy(a) = -h(a) * q.x;
    }
    e.col(0) = eps.etaMatrix * dx;
    e.col(1) = eps.etaMatrix * dy;
  } else {
    Eigen::VectorXcd dz(n);
    for (Eigen::Index a = 0; a < n; ++a) {
      dz(a) = h(a) * norm(basis.wavevector(static_cast<std::size_t>(a)));
    }
    e.col(2) = eps.etaMatrix * dz;
  }
  return e;
}

}  // namespace

std::string_view to_string(Polarization pol) { return pol == Polarization::Even ? "even" : "odd"; }

Polarization polarizationFromString(std::string_view name) {
  if (name == "even" || name == "te" || name == "TE") return Polarization::Even;
  if (name == "odd" || name == "tm" || name == "TM") return Polarization::Odd;
  throw Error(ErrorKind::InvalidArgument, fmt::format("unknown polarization '{}'", name));
}

Eigen::MatrixXcd assembleOperator(const EpsilonFourier& eps, Vec2 k, Polarization pol,
                                  ExecutionPolicy policy) {
  if (!eps.basis || norm(eps.basis->center() - k) > 1e-12 ||
      eps.etaMatrix.rows() != static_cast<Eigen::Index>(eps.basis->size())) {
    throw Error(ErrorKind::BasisMismatch,
                fmt::format("operator requested at k=({}, {}) but basis is centred elsewhere", k.x, k.y));
  }
  const auto& basis = *eps.basis;
  const auto n = static_cast<Eigen::Index>(basis.size());
  std::vector<Vec2> q(static_cast<std::size_t>(n));
  std::vector<double> qn(static_cast<std::size_t>(n));
  for (Eigen::Index a = 0; a < n; ++a) {
    q[a] = basis.wavevector(static_cast<std::size_t>(a));
    qn[a] = norm(q[a]);
  }
  Eigen::MatrixXcd m(n, n);
  const auto column = [&](Eigen::Index b) {
    for (Eigen::Index a = 0; a < n; ++a) {
      const double w = pol == Polarization::Even ? dot(q[a], q[b]) : qn[a] * qn[b];
      m(a, b) = eps.etaMatrix(a, b) * w;
    }
  };
  if (policy == ExecutionPolicy::Parallel) {
#pragma omp parallel for schedule(static) num_threads(workerCount())
    for (Eigen::Index b = 0; b < n; ++b) column(b);
  } else {
    for (Eigen::Index b = 0; b < n; ++b) column(b);
  }
  return m;
}

EigenSolution solveBands(const Eigen::MatrixXcd& op, int numBands) {
  const auto n = static_cast<lapack_int>(op.rows());
  if (op.cols() != op.rows() || n == 0) {
    throw Error(ErrorKind::InvalidArgument, "operator must be a non-empty square matrix");
  }
  if (numBands < 1) throw Error(ErrorKind::InvalidArgument, "numBands must be positive");
  if (numBands > n) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("{} bands requested from a {}-plane-wave basis; raise the cutoff",
                            numBands, n));
  }
  pinBlasThreads();
  Eigen::MatrixXcd work = op;
  std::vector<double> w(static_cast<std::size_t>(n));
  Eigen::MatrixXcd z(n, numBands);
  std::vector<lapack_int> support(2 * static_cast<std::size_t>(numBands));
  lapack_int found = 0;
  const lapack_int info =
      LAPACKE_zheevr(LAPACK_COL_MAJOR, 'V', 'I', 'U', n, work.data(), n, 0.0, 0.0, 1, numBands, 0.0,
                     &found, w.data(), z.data(), n, support.data());
  if (info != 0 || found != numBands) {
    throw Error(ErrorKind::EigensolverFailure,
                fmt::format("zheevr returned info={} with {} of {} eigenpairs", info, found, numBands));
  }
  EigenSolution out;
  out.frequencies.resize(static_cast<std::size_t>(numBands));
  for (int i = 0; i < numBands; ++i) {
    double lambda = w[static_cast<std::size_t>(i)];
    if (lambda < 0.0) {
      if (lambda <= -1e-10) {
        throw Error(ErrorKind::EigensolverFailure,
                    fmt::format("negative eigenvalue {} from a semidefinite operator", lambda));
      }
      lambda = 0.0;
    }
    out.frequencies[static_cast<std::size_t>(i)] = std::sqrt(lambda);
  }
  out.vectors = std::move(z);
  return out;
}

double electricEnergy(const Eigen::MatrixXcd& e, const Eigen::MatrixXcd& epsMatrix, double cellArea) {
  double total = 0.0;
  for (Eigen::Index c = 0; c < e.cols(); ++c) {
    if (e.col(c).squaredNorm() == 0.0) continue;
    total += e.col(c).dot(epsMatrix * e.col(c)).real();
  }
  return total * cellArea;
}

BandSolver::BandSolver(EpsilonGrid grid, double cutoff, FourierRule rule, BasisLimits limits)
    : spectrum_(DielectricSpectrum::compute(std::move(grid))),
      cutoff_(cutoff),
      rule_(rule),
      limits_(std::move(limits)) {
  if (!(cutoff > 0.0)) throw Error(ErrorKind::InvalidArgument, "cutoff must be positive");
}

std::shared_ptr<const PlaneWaveBasis> BandSolver::basisAt(Vec2 k) const {
  return std::make_shared<const PlaneWaveBasis>(
      PlaneWaveBasis::build(spectrum_->grid.lattice, k, cutoff_, limits_));
}

EpsilonFourier BandSolver::fourierAt(Vec2 k) const {
  return fourierCoefficients(*spectrum_, basisAt(k), rule_);
}

KPointSolution BandSolver::solve(Vec2 k, Polarization pol, int numBands, bool retainModes) const {
  const EpsilonFourier eps = fourierAt(k);
  const Eigen::MatrixXcd op = assembleOperator(eps, k, pol, ExecutionPolicy::Serial);
  EigenSolution sol = solveBands(op, numBands);

  KPointSolution out;
  out.frequencies = sol.frequencies;
  if (!retainModes) return out;

  const double area = spectrum_->grid.lattice.cellArea();
  out.modes.reserve(static_cast<std::size_t>(numBands));
  for (int b = 0; b < numBands; ++b) {
    BlochMode mode;
    mode.k = k;
    mode.band = b;
    mode.polarization = pol;
    mode.frequency = sol.frequencies[static_cast<std::size_t>(b)];
    mode.basis = eps.basis;
    mode.h = sol.vectors.col(b);
    mode.e = electricCoefficients(eps, pol, mode.h);
    const double energy = electricEnergy(mode.e, eps.epsMatrix, area);
    // Zero-frequency modes have curl H = 0 and no electric field to normalize.
    if (energy > 1e-24) {
      const double scale = 1.0 / std::sqrt(energy);
      mode.e *= scale;
      mode.h *= scale;
    } else {
      mode.e.setZero();
    }
    out.modes.push_back(std::move(mode));
  }
  return out;
}

std::vector<double> BandStructure::band(int n) const {
  std::vector<double> out(numK());
  for (std::size_t i = 0; i < numK(); ++i) out[i] = frequencies(static_cast<Eigen::Index>(i), n);
  return out;
}

BandStructure bandSweep(const BandSolver& solver, Polarization pol, std::span<const Vec2> kPath,
                        int numBands, bool retainModes, ExecutionPolicy policy) {
  if (kPath.empty()) throw Error(ErrorKind::InvalidArgument, "k-path is empty");
  pinBlasThreads();
  const auto nk = static_cast<int>(kPath.size());
  std::vector<KPointSolution> results(kPath.size());
  std::vector<std::exception_ptr> failures(kPath.size());

  const auto item = [&](int i) {
    try {
      results[static_cast<std::size_t>(i)] =
          solver.solve(kPath[static_cast<std::size_t>(i)], pol, numBands, retainModes);
    } catch (...) {
      failures[static_cast<std::size_t>(i)] = std::current_exception();
    }
  };
  if (policy == ExecutionPolicy::Parallel) {
#pragma omp parallel for schedule(dynamic, 1) num_threads(workerCount())
    for (int i = 0; i < nk; ++i) item(i);
  } else {
    for (int i = 0; i < nk; ++i) item(i);
  }
  for (std::size_t i = 0; i < failures.size(); ++i) {
    if (!failures[i]) continue;
    try {
      std::rethrow_exception(failures[i]);
    } catch (const Error& e) {
      throw Error(e.kind(), fmt::format("at k-point {} ({}, {}): {}", i, kPath[i].x, kPath[i].y, e.detail()));
    }
  }

  BandStructure out;
  out.polarization = pol;
  out.lattice = solver.grid().lattice;
  out.kPath.assign(kPath.begin(), kPath.end());
  out.frequencies.resize(nk, numBands);
  for (int i = 0; i < nk; ++i) {
    for (int b = 0; b < numBands; ++b) {
      out.frequencies(i, b) = results[static_cast<std::size_t>(i)].frequencies[static_cast<std::size_t>(b)];
    }
  }
  if (retainModes) {
    out.modes.reserve(kPath.size());
    for (auto& r : results) out.modes.push_back(std::move(r.modes));
  }
  out.provenance.cutoff = solver.cutoff();
  out.provenance.rule = solver.rule();
  out.provenance.resolution = solver.grid().resolution;
  return out;
}

BandStructure bandSweep(const StructureSpec& structure, Polarization pol,
                        std::span<const Vec2> kPath, int numBands, const SolverOptions& options) {
  const BandSolver solver(rasterizeDielectric(structure, meshFor(structure, options.resolution), options.policy),
                          options.cutoff, options.rule);
  BandStructure out = bandSweep(solver, pol, kPath, numBands, options.retainModes, options.policy);
  out.provenance.structureHash = hashString(structureHash(structure));
  out.provenance.geometryHash = hashString(geometryHash(structure));
  out.provenance.epsBackground = structure.epsBackground;
  return out;
}

double maxBandSlope(const BandStructure& bands) {
  double worst = 0.0;
  for (std::size_t i = 1; i < bands.numK(); ++i) {
    const double dk = norm(bands.kPath[i] - bands.kPath[i - 1]);
    if (dk <= 0.0) continue;
    for (int b = 0; b < bands.numBands(); ++b) {
      const double d = std::abs(bands.frequencies(static_cast<Eigen::Index>(i), b) -
                                bands.frequencies(static_cast<Eigen::Index>(i - 1), b));
      worst = std::max(worst, d / dk);
    }
  }
  return worst;
}

FieldGrid computeFields(const BlochMode& mode, Resolution res, ExecutionPolicy policy) {
  if (!mode.hasCoefficients()) {
    throw Error(ErrorKind::MissingEigenvector, "mode has no retained coefficients");
  }
  const PlaneWaveBasis& basis = *mode.basis;
  if (res.n1 <= 2 * basis.maxAbsIndex(0) || res.n2 <= 2 * basis.maxAbsIndex(1)) {
    throw Error(ErrorKind::AliasingRisk, "field mesh too coarse for the mode's plane waves");
  }
  FieldGrid out;
  out.lattice = basis.lattice();
  out.resolution = res;
  const std::size_t total = static_cast<std::size_t>(res.n1) * res.n2;
  for (auto& c : out.components) c.assign(total, Complex(0.0, 0.0));
  const std::size_t nG = basis.size();

  if (policy == ExecutionPolicy::Serial) {
    for (int c = 0; c < 3; ++c) {
      if (mode.e.col(c).squaredNorm() == 0.0) continue;
      for (int j = 0; j < res.n2; ++j) {
        for (int i = 0; i < res.n1; ++i) {
          const double f1 = (i + 0.5) / res.n1;
          const double f2 = (j + 0.5) / res.n2;
          const Vec2 r = out.lattice.point(f1, f2);
          Complex sum = 0.0;
          for (std::size_t g = 0; g < nG; ++g) {
            sum += mode.e(static_cast<Eigen::Index>(g), c) * unitPhase(dot(basis.wavevector(g), r));
          }
          out.components[c][static_cast<std::size_t>(j) * res.n1 + i] = sum;
        }
      }
    }
    return out;
  }

  std::vector<Complex> bloch(total);
#pragma omp parallel for schedule(static) num_threads(workerCount())
  for (int j = 0; j < res.n2; ++j) {
    for (int i = 0; i < res.n1; ++i) {
      const Vec2 r = out.lattice.point((i + 0.5) / res.n1, (j + 0.5) / res.n2);
      bloch[static_cast<std::size_t>(j) * res.n1 + i] = unitPhase(dot(mode.k, r));
    }
  }
  for (int c = 0; c < 3; ++c) {
    if (mode.e.col(c).squaredNorm() == 0.0) continue;
    auto& data = out.components[c];
    for (std::size_t g = 0; g < nG; ++g) {
      const GIndex& n = basis[g];
      const Complex shift = unitPhase(0.5 * (static_cast<double>(n.n1) / res.n1 +
                                             static_cast<double>(n.n2) / res.n2));
      data[static_cast<std::size_t>(wrap(n.n2, res.n2)) * res.n1 + wrap(n.n1, res.n1)] +=
          mode.e(static_cast<Eigen::Index>(g), c) * shift;
    }
    fftw_plan plan;
    {
      std::lock_guard lock(fftwPlannerMutex());
      auto* p = reinterpret_cast<fftw_complex*>(data.data());
      plan = fftw_plan_dft_2d(res.n2, res.n1, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    {
      std::lock_guard lock(fftwPlannerMutex());
      fftw_destroy_plan(plan);
    }
#pragma omp parallel for schedule(static) num_threads(workerCount())
    for (std::size_t p = 0; p < total; ++p) data[p] *= bloch[p];
  }
  return out;
}

Vec2 symmetryPoint(LatticeKind kind, std::string_view name) {
  if (name == "Gamma" || name == "G" || name == "gamma") return {0.0, 0.0};
  if (kind == LatticeKind::Hexagonal) {
    if (name == "K") return {2.0 / 3.0, 0.0};
    if (name == "M") return {0.5, 0.5 / std::numbers::sqrt3};
  } else if (kind == LatticeKind::Square) {
    if (name == "X") return {0.5, 0.0};
    if (name == "M") return {0.5, 0.5};
  }
  throw Error(ErrorKind::InvalidArgument,
              fmt::format("unknown symmetry point '{}' for {} lattice", name, to_string(kind)));
}

std::vector<Vec2> interpolatePath(std::span<const Vec2> vertices, int pointsPerSegment) {
  if (vertices.empty()) throw Error(ErrorKind::InvalidArgument, "path needs at least one vertex");
  if (pointsPerSegment < 1) throw Error(ErrorKind::InvalidArgument, "pointsPerSegment must be positive");
  std::vector<Vec2> out;
  for (std::size_t v = 0; v + 1 < vertices.size(); ++v) {
    for (int s = 0; s < pointsPerSegment; ++s) {
      const double t = static_cast<double>(s) / pointsPerSegment;
      out.push_back(vertices[v] + (vertices[v + 1] - vertices[v]) * t);
    }
  }
  out.push_back(vertices.back());
  return out;
}

std::vector<Vec2> kxLine(int count, double kxMax) {
  if (count < 2) throw Error(ErrorKind::InvalidArgument, "kx grid needs at least 2 points");
  std::vector<Vec2> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) out[static_cast<std::size_t>(i)] = {kxMax * i / (count - 1), 0.0};
  return out;
}

std::vector<Vec2> irreducibleZoneSampling(LatticeKind kind, int density) {
  if (density < 1) throw Error(ErrorKind::InvalidArgument, "density must be positive");
  Vec2 corner1, corner2;
  if (kind == LatticeKind::Hexagonal) {
    corner1 = symmetryPoint(kind, "K");
    corner2 = symmetryPoint(kind, "M");
  } else if (kind == LatticeKind::Square) {
    corner1 = symmetryPoint(kind, "X");
    corner2 = symmetryPoint(kind, "M");
  } else {
    throw Error(ErrorKind::InvalidArgument, "zone sampling needs a primitive lattice");
  }
  std::vector<Vec2> out;
  for (int i = 0; i <= density; ++i) {
    for (int j = 0; j <= i; ++j) {
      out.push_back(corner1 * (static_cast<double>(i) / density) +
                    (corner2 - corner1) * (static_cast<double>(j) / density));
    }
  }
  return out;
}

}  // namespace pcw
