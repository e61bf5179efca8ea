#include "pcw/analysis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "pcw/error.hpp"

namespace pcw {

std::vector<Interval> mergeIntervals(std::vector<Interval> intervals, double tol) {
  std::sort(intervals.begin(), intervals.end(), [](const Interval& a, const Interval& b) {
    return a.lo != b.lo ? a.lo < b.lo : a.hi < b.hi;
  });
  std::vector<Interval> out;
  for (const auto& iv : intervals) {
    if (!out.empty() && iv.lo <= out.back().hi + tol) {
      out.back().hi = std::max(out.back().hi, iv.hi);
    } else {
      out.push_back(iv);
    }
  }
  return out;
}

double transversePeriod(LatticeKind kind) {
  switch (kind) {
    case LatticeKind::Hexagonal:
      return 2.0 / std::numbers::sqrt3;
    case LatticeKind::Square:
      return 1.0;
    case LatticeKind::Supercell:
      break;
  }
  throw Error(ErrorKind::InvalidArgument, "transverse period needs a primitive lattice");
}

ProjectedBands projectBands(const StructureSpec& structure, Polarization pol,
                            std::span<const double> kxGrid, int transverseSamples, int numBands,
                            const SolverOptions& options) {
  if (structure.isSupercell() || (structure.defect && structure.defect->missingRows > 0)) {
    throw Error(ErrorKind::DefectPresent, "projection needs the perfect primitive crystal");
  }
  if (transverseSamples < 8) {
    throw Error(ErrorKind::InvalidArgument,
                fmt::format("transverseSamples must be at least 8, got {}", transverseSamples));
  }
  if (kxGrid.empty()) throw Error(ErrorKind::InvalidArgument, "kx grid is empty");

  const double period = transversePeriod(structure.lattice.kind);
  std::vector<Vec2> ks;
  ks.reserve(kxGrid.size() * static_cast<std::size_t>(transverseSamples));
  for (double kx : kxGrid) {
    for (int j = 0; j < transverseSamples; ++j) ks.push_back({kx, period * j / transverseSamples});
  }
  const BandStructure bands = bandSweep(structure, pol, ks, numBands, options);

  ProjectedBands pb;
  pb.lattice = structure.lattice.kind;
  pb.polarization = pol;
  pb.kxGrid.assign(kxGrid.begin(), kxGrid.end());
  pb.transverseSamples = transverseSamples;
  pb.allowed.resize(kxGrid.size());
  for (std::size_t i = 0; i < kxGrid.size(); ++i) {
    std::vector<Interval> spans;
    for (int b = 0; b < numBands; ++b) {
      Interval iv{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
      for (int j = 0; j < transverseSamples; ++j) {
        const double w = bands.frequencies(static_cast<Eigen::Index>(i * transverseSamples + j), b);
        iv.lo = std::min(iv.lo, w);
        iv.hi = std::max(iv.hi, w);
      }
      spans.push_back(iv);
    }
    pb.allowed[i] = mergeIntervals(std::move(spans));
  }
  return pb;
}

ProjectedBands lightConeMask(ProjectedBands pb, double surroundIndex) {
  if (!(surroundIndex > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "surround index must be positive");
  }
  pb.lightLineIndex = surroundIndex;
  pb.masked = true;
  return pb;
}

std::vector<Interval> findGaps(const BandStructure& bands) {
  // Bands are sorted per k, so band n's maximum bounds every lower band and
  // band n+1's minimum bounds every higher one.
  std::vector<Interval> gaps;
  if (bands.numK() == 0) return gaps;
  for (int n = 0; n + 1 < bands.numBands(); ++n) {
    const double top = bands.frequencies.col(n).maxCoeff();
    const double bottom = bands.frequencies.col(n + 1).minCoeff();
    if (bottom > top) gaps.push_back({top, bottom});
  }
  return gaps;
}

std::vector<Interval> findGapsChecked(const StructureSpec& structure, Polarization pol,
                                      int zoneDensity, int numBands, const SolverOptions& options) {
  const auto coarseK = irreducibleZoneSampling(structure.lattice.kind, zoneDensity);
  const auto fineK = irreducibleZoneSampling(structure.lattice.kind, 2 * zoneDensity);
  const auto coarse = findGaps(bandSweep(structure, pol, coarseK, numBands, options));
  const auto fine = findGaps(bandSweep(structure, pol, fineK, numBands, options));
  if (coarse.size() != fine.size()) {
    throw Error(ErrorKind::InsufficientKSampling,
                fmt::format("gap count changed from {} to {} when k sampling was doubled",
                            coarse.size(), fine.size()));
  }
  for (std::size_t g = 0; g < fine.size(); ++g) {
    const double dlo = std::abs(fine[g].lo - coarse[g].lo) / fine[g].lo;
    const double dhi = std::abs(fine[g].hi - coarse[g].hi) / fine[g].hi;
    if (dlo > 0.01 || dhi > 0.01) {
      throw Error(ErrorKind::InsufficientKSampling,
                  fmt::format("gap {} edges moved by {:.3g} / {:.3g} when k sampling was doubled", g,
                              dlo, dhi));
    }
  }
  return fine;
}

GapMap gapMap(const StructureSpec& structure, std::span<const double> radii, Polarization pol,
              int zoneDensity, int numBands, const SolverOptions& options, bool checkSampling) {
  std::vector<double> sorted(radii.begin(), radii.end());
  std::sort(sorted.begin(), sorted.end());
  GapMap map;
  map.polarization = pol;
  const auto ks = irreducibleZoneSampling(structure.lattice.kind, zoneDensity);
  for (double r : sorted) {
    const StructureSpec s = withRadius(structure, r);
    GapMapEntry entry{r, {}};
    entry.gaps = checkSampling ? findGapsChecked(s, pol, zoneDensity, numBands, options)
                               : findGaps(bandSweep(s, pol, ks, numBands, options));
    map.entries.push_back(std::move(entry));
  }
  return map;
}

std::string_view to_string(ModeLabel label) {
  switch (label) {
    case ModeLabel::GapGuided:
      return "gap-guided";
    case ModeLabel::IndexGuided:
      return "index-guided";
    case ModeLabel::Leaky:
      return "leaky";
    case ModeLabel::Extended:
      return "extended";
  }
  return "?";
}

DefectModeClassification classifyDefectModes(const BandStructure& defectBands,
                                              const ProjectedBands& pb, double tol) {
  if (pb.kxGrid.size() != pb.allowed.size()) {
    throw Error(ErrorKind::InvalidArgument, "projected bands are inconsistent");
  }
  if (std::abs(defectBands.lattice.a1.y) > 1e-12) {
    throw Error(ErrorKind::AxisMismatch, "defect cell's guide vector a1 is not along x");
  }
  DefectModeClassification out;
  for (std::size_t i = 0; i < defectBands.numK(); ++i) {
    const Vec2 k = defectBands.kPath[i];
    if (std::abs(k.y) > 1e-12) {
      throw Error(ErrorKind::AxisMismatch,
                  fmt::format("defect k-point {} has ky = {}; expected points on the guide axis", i, k.y));
    }
    const auto it = std::find_if(pb.kxGrid.begin(), pb.kxGrid.end(),
                                 [&](double kx) { return std::abs(kx - k.x) <= 1e-9; });
    if (it == pb.kxGrid.end()) {
      throw Error(ErrorKind::AxisMismatch,
                  fmt::format("defect kx = {} is not on the projected kx grid", k.x));
    }
    const auto p = static_cast<std::size_t>(it - pb.kxGrid.begin());
    const auto& allowed = pb.allowed[p];
    for (int b = 0; b < defectBands.numBands(); ++b) {
      const double w = defectBands.frequencies(static_cast<Eigen::Index>(i), b);
      ModeLabel label;
      if (pb.aboveLightLine(p, w)) {
        label = ModeLabel::Leaky;
      } else if (allowed.empty() || w > pb.ceiling(p) + tol ||
                 std::any_of(allowed.begin(), allowed.end(),
                             [&](const Interval& iv) { return iv.contains(w, tol); })) {
        label = ModeLabel::Extended;
      } else if (w < allowed.front().lo) {
        label = ModeLabel::IndexGuided;
      } else {
        label = ModeLabel::GapGuided;
      }
      out.modes.push_back({i, k.x, b, w, label});
    }
  }
  return out;
}

std::vector<double> groupVelocity(std::span<const double> omega, double dk) {
  if (omega.size() < 3) {
    throw Error(ErrorKind::TooFewSamples,
                fmt::format("group velocity needs at least 3 samples, got {}", omega.size()));
  }
  if (!(dk > 0.0)) throw Error(ErrorKind::InvalidArgument, "k spacing must be positive");
  const std::size_t n = omega.size();
  std::vector<double> u(n);
  u[0] = (omega[1] - omega[0]) / dk;
  u[n - 1] = (omega[n - 1] - omega[n - 2]) / dk;
  for (std::size_t i = 1; i + 1 < n; ++i) u[i] = (omega[i + 1] - omega[i - 1]) / (2.0 * dk);
  return u;
}

std::vector<double> groupVelocity(std::span<const double> k, std::span<const double> omega) {
  if (k.size() != omega.size()) {
    throw Error(ErrorKind::InvalidArgument, "k and omega sample counts differ");
  }
  if (k.size() < 3) {
    throw Error(ErrorKind::TooFewSamples,
                fmt::format("group velocity needs at least 3 samples, got {}", k.size()));
  }
  const double dk = (k.back() - k.front()) / static_cast<double>(k.size() - 1);
  for (std::size_t i = 1; i < k.size(); ++i) {
    if (std::abs((k[i] - k[i - 1]) - dk) > 1e-9 * std::max(1.0, std::abs(dk))) {
      throw Error(ErrorKind::InvalidArgument, "group velocity needs uniformly spaced k samples");
    }
  }
  return groupVelocity(omega, dk);
}

}  // namespace pcw
