#include "pcw/overlap.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

#include "pcw/error.hpp"

namespace pcw {
namespace {

bool sameLattice(const LatticeSpec& a, const LatticeSpec& b) {
  return norm(a.a1 - b.a1) < 1e-12 && norm(a.a2 - b.a2) < 1e-12;
}

// One product term conj(p) * s * i, each factor a fixed combination of E components.
struct Term {
  Eigen::Vector3d pump, signal, idler;
};

std::vector<Term> contraction(Polarization pumpPolarization) {
  const Eigen::Vector3d x(1, 0, 0), y(0, 1, 0), z(0, 0, 1), all(1, 1, 1);
  if (pumpPolarization == Polarization::Odd) return {{z, x, x}, {z, y, y}};
  return {{all, all, all}};
}

Eigen::VectorXcd combine(const BlochMode& mode, const Eigen::Vector3d& weights) {
  return mode.e * weights.cast<Complex>();
}

GIndex checkInputs(const BlochMode& pump, const BlochMode& signal, const BlochMode& idler,
                   const NonlinearRegion& region) {
  for (const BlochMode* m : {&pump, &signal, &idler}) {
    if (!m->hasCoefficients()) {
      throw Error(ErrorKind::MissingEigenvector, "overlap needs modes with retained coefficients");
    }
    if (!sameLattice(m->basis->lattice(), region.lattice)) {
      throw Error(ErrorKind::InvalidArgument, "modes and nonlinear region live on different cells");
    }
  }
  const Vec2 dk = signal.k + idler.k - pump.k;
  const auto c = region.lattice.reciprocalCoordinates(dk);
  const double r1 = std::round(c[0]);
  const double r2 = std::round(c[1]);
  if (std::abs(c[0] - r1) > 1e-9 || std::abs(c[1] - r2) > 1e-9) {
    throw Error(ErrorKind::MomentumMismatch,
                fmt::format("k_s + k_i - k_p = ({:.6g}, {:.6g}) is not a reciprocal vector of the cell",
                            dk.x, dk.y));
  }
  return {static_cast<int>(r1), static_cast<int>(r2)};
}

OverlapResult finish(Complex value, GIndex shift) {
  OverlapResult r;
  r.value = value;
  r.magnitude = std::abs(value);
  r.phase = std::arg(value);
  r.momentumConserved = true;
  r.shift = shift;
  return r;
}

}  // namespace

NonlinearRegion NonlinearRegion::fromGrid(const EpsilonGrid& grid, double scalarWeight) {
  return fromIndicator(grid.lattice, grid.resolution, grid.materialIndicator(), scalarWeight);
}

NonlinearRegion NonlinearRegion::fromIndicator(const LatticeSpec& lattice, Resolution resolution,
                                               std::vector<double> indicator, double scalarWeight) {
  if (indicator.size() != static_cast<std::size_t>(resolution.n1) * resolution.n2) {
    throw Error(ErrorKind::InvalidArgument, "indicator size does not match the mesh");
  }
  for (double v : indicator) {
    if (v < 0.0 || v > 1.0) throw Error(ErrorKind::InvalidArgument, "indicator values must lie in [0, 1]");
  }
  NonlinearRegion region;
  region.lattice = lattice;
  region.resolution = resolution;
  region.scalarWeight = scalarWeight;
  region.spectrum = GridSpectrum(resolution, indicator);
  region.indicator = std::move(indicator);
  return region;
}

double modeEnergy(const BlochMode& mode, const DielectricSpectrum& spectrum) {
  if (!mode.hasCoefficients()) throw Error(ErrorKind::MissingEigenvector, "mode has no coefficients");
  if (!sameLattice(mode.basis->lattice(), spectrum.grid.lattice)) {
    throw Error(ErrorKind::InvalidArgument, "mode and dielectric live on different cells");
  }
  return electricEnergy(mode.e, convolutionMatrix(spectrum.eps, *mode.basis),
                        spectrum.grid.lattice.cellArea());
}

BlochMode normalizeMode(const BlochMode& mode, const DielectricSpectrum& spectrum) {
  if (mode.hasCoefficients() && mode.e.squaredNorm() == 0.0) {
    throw Error(ErrorKind::ZeroVector, "mode has no electric field to normalize");
  }
  const double energy = modeEnergy(mode, spectrum);
  if (!(energy > 0.0)) throw Error(ErrorKind::ZeroVector, "mode has zero electric energy");
  BlochMode out = mode;
  const double scale = 1.0 / std::sqrt(energy);
  out.e *= scale;
  out.h *= scale;
  return out;
}

OverlapResult overlapQuadrature(const BlochMode& pump, const BlochMode& signal, const BlochMode& idler,
                                const NonlinearRegion& region) {
  const GIndex shift = checkInputs(pump, signal, idler, region);
  const FieldGrid fp = computeFields(pump, region.resolution);
  const FieldGrid fs = computeFields(signal, region.resolution);
  const FieldGrid fi = computeFields(idler, region.resolution);
  const auto terms = contraction(pump.polarization);
  Complex sum = 0.0;
  for (std::size_t p = 0; p < fp.size(); ++p) {
    if (region.indicator[p] == 0.0) continue;
    Complex local = 0.0;
    for (const auto& t : terms) {
      Complex ep = 0.0, es = 0.0, ei = 0.0;
      for (int c = 0; c < 3; ++c) {
        ep += t.pump[c] * fp.components[c][p];
        es += t.signal[c] * fs.components[c][p];
        ei += t.idler[c] * fi.components[c][p];
      }
      local += std::conj(ep) * es * ei;
    }
    sum += region.indicator[p] * local;
  }
  const double pixelArea = region.lattice.cellArea() / static_cast<double>(fp.size());
  return finish(region.scalarWeight * pixelArea * sum, shift);
}

OverlapResult overlapCoefficients(const BlochMode& pump, const BlochMode& signal, const BlochMode& idler,
                                  const NonlinearRegion& region) {
  const GIndex shift = checkInputs(pump, signal, idler, region);
  const auto& bp = *pump.basis;
  const auto& bs = *signal.basis;
  const auto& bi = *idler.basis;

  // Dense box for Q = G_s + G_i.
  const int r1 = bs.maxAbsIndex(0) + bi.maxAbsIndex(0);
  const int r2 = bs.maxAbsIndex(1) + bi.maxAbsIndex(1);
  const int w1 = 2 * r1 + 1;
  const int w2 = 2 * r2 + 1;
  const auto slot = [&](const GIndex& q) {
    return static_cast<std::size_t>(q.n2 + r2) * w1 + static_cast<std::size_t>(q.n1 + r1);
  };

  const auto terms = contraction(pump.polarization);
  const auto nTerms = static_cast<int>(terms.size());
  std::vector<Complex> partial(terms.size());
#pragma omp parallel for schedule(static) num_threads(workerCount())
  for (int t = 0; t < nTerms; ++t) {
    const Eigen::VectorXcd p = combine(pump, terms[t].pump);
    const Eigen::VectorXcd s = combine(signal, terms[t].signal);
    const Eigen::VectorXcd i = combine(idler, terms[t].idler);
    std::vector<Complex> product(static_cast<std::size_t>(w1) * w2, Complex(0.0, 0.0));
    for (std::size_t a = 0; a < bs.size(); ++a) {
      if (s(static_cast<Eigen::Index>(a)) == 0.0) continue;
      for (std::size_t b = 0; b < bi.size(); ++b) {
        product[slot(bs[a] + bi[b])] += s(static_cast<Eigen::Index>(a)) * i(static_cast<Eigen::Index>(b));
      }
    }
    Complex acc = 0.0;
    for (std::size_t c = 0; c < bp.size(); ++c) {
      const Complex pc = std::conj(p(static_cast<Eigen::Index>(c)));
      if (pc == 0.0) continue;
      Complex inner = 0.0;
      for (int q2 = -r2; q2 <= r2; ++q2) {
        for (int q1 = -r1; q1 <= r1; ++q1) {
          const Complex tq = product[slot({q1, q2})];
          if (tq == 0.0) continue;
          const GIndex arg = shift + GIndex{q1, q2} - bp[c];
          inner += tq * std::conj(region.spectrum.at(arg));
        }
      }
      acc += pc * inner;
    }
    partial[static_cast<std::size_t>(t)] = acc;
  }
  Complex sum = 0.0;
  for (const auto& v : partial) sum += v;
  return finish(region.scalarWeight * region.lattice.cellArea() * sum, shift);
}

OverlapResult overlapIntegral(const BlochMode& pump, const BlochMode& signal, const BlochMode& idler,
                              const NonlinearRegion& region, ExecutionPolicy policy) {
  return policy == ExecutionPolicy::Serial ? overlapQuadrature(pump, signal, idler, region)
                                           : overlapCoefficients(pump, signal, idler, region);
}

}  // namespace pcw
