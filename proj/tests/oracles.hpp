#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance run.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <tuple>
#include <functional>
#include <vector>

#include "pcw/lattice.hpp"
#include "pcw/phasematch.hpp"

namespace oracle {

// Sorted |k+G| / sqrt(eps) over a generous box of reciprocal vectors.
inline std::vector<double> freeBands(const pcw::LatticeSpec& l, pcw::Vec2 k, double eps, int count) {
  std::vector<double> w;
  for (int n1 = -12; n1 <= 12; ++n1) {
    for (int n2 = -12; n2 <= 12; ++n2) w.push_back(pcw::norm(k + l.reciprocal(n1, n2)) / std::sqrt(eps));
  }
  std::sort(w.begin(), w.end());
  w.resize(static_cast<std::size_t>(count));
  return w;
}

// Roots in omega (a/lambda) of the two-layer dispersion relation at K a = pi,
//   cos(k1 d1) cos(k2 d2) - (n1/n2 + n2/n1)/2 sin(k1 d1) sin(k2 d2) = -1,
// located by a fine scan and bisection.
inline std::vector<double> transferMatrixEdges(double eps1, double d1, double eps2, int count) {
  const double n1 = std::sqrt(eps1), n2 = std::sqrt(eps2), d2 = 1.0 - d1;
  const auto f = [&](double w) {
    const double p1 = 2.0 * std::numbers::pi * w * n1 * d1, p2 = 2.0 * std::numbers::pi * w * n2 * d2;
    return std::cos(p1) * std::cos(p2) - 0.5 * (n1 / n2 + n2 / n1) * std::sin(p1) * std::sin(p2) + 1.0;
  };
  std::vector<double> roots;
  const double step = 1e-5;
  for (double w = step; roots.size() < static_cast<std::size_t>(count) && w < 5.0; w += step) {
    double lo = w - step, hi = w;
    if (f(lo) * f(hi) < 0.0) {
      for (int it = 0; it < 80; ++it) {
        const double mid = 0.5 * (lo + hi);
        (f(lo) * f(mid) <= 0.0 ? hi : lo) = mid;
      }
      roots.push_back(0.5 * (lo + hi));
    } else if (f(hi) == 0.0) {
      roots.push_back(hi);
    }
  }
  return roots;
}

// (pump band, signal band, idler band, m, k1, k2)
using MatchKey = std::tuple<int, int, int, int, double, double>;

inline MatchKey key(const pcw::MatchSolution& s) {
  return {s.pump.band, s.signal.band, s.idler.band, s.m, s.signal.k, s.idler.k};
}

inline std::set<MatchKey> keys(const std::vector<pcw::MatchSolution>& v) {
  std::set<MatchKey> out;
  for (const auto& s : v) out.insert(key(s));
  return out;
}

// Exhaustive enumeration of every (k1, k2, band triple, m) on the signed grid.
inline std::set<MatchKey> bruteForceMatches(const pcw::StitchedDispersion& d, const pcw::MatchOptions& o) {
  using Section = pcw::StitchedDispersion::Section;
  std::set<MatchKey> out;
  const auto grid = d.signedGrid();
  for (int p = 0; p < d.numBands(Section::High); ++p) {
    for (int b1 = 0; b1 < d.numBands(Section::Low); ++b1) {
      for (int b2 = 0; b2 < d.numBands(Section::Low); ++b2) {
        for (int m = o.mMin; m <= o.mMax; ++m) {
          for (double k1 : grid) {
            for (double k2 : grid) {
              const double kp = k1 + k2 - m;
              if (!(kp > -0.5 && kp <= 0.5) || std::abs(kp) > d.kMax() + 1e-12) continue;
              const double w1 = *d.frequency(Section::Low, b1, k1);
              const double w2 = *d.frequency(Section::Low, b2, k2);
              const double wp = *d.frequency(Section::High, p, kp);
              if (!d.window(Section::Low).contains(w1) || !d.window(Section::Low).contains(w2) ||
                  !d.window(Section::High).contains(wp)) {
                continue;
              }
              if (std::abs(w1 + w2 - wp) <= o.energyTol) out.insert({p, b1, b2, m, k1, k2});
            }
          }
        }
      }
    }
  }
  return out;
}

inline double cosineBand(double k, double base, double depth) {
  return base + depth * 0.5 * (1.0 - std::cos(2.0 * std::numbers::pi * k));
}

// Three smooth down-conversion bands and three pump bands on a 50-point grid.
inline pcw::StitchedDispersion syntheticDispersion() {
  const std::vector<std::function<double(double)>> low{
      [](double k) { return cosineBand(k, 0.11, 0.05); },
      [](double k) { return cosineBand(k, 0.13, -0.02) + 0.02; },
      [](double k) { return cosineBand(k, 0.16, 0.035); }};
  const std::vector<std::function<double(double)>> high{
      [](double k) { return cosineBand(k, 0.26, 0.06); },
      [](double k) { return cosineBand(k, 0.30, -0.04); },
      [](double k) { return cosineBand(k, 0.31, 0.03); }};
  const auto build = [](const std::vector<std::function<double(double)>>& bands) {
    pcw::BandStructure b;
    b.lattice = pcw::buildLattice(pcw::LatticeKind::Hexagonal);
    b.kPath = pcw::kxLine(50, 0.49);
    b.frequencies.resize(50, static_cast<Eigen::Index>(bands.size()));
    for (int i = 0; i < 50; ++i) {
      for (std::size_t n = 0; n < bands.size(); ++n) b.frequencies(i, static_cast<Eigen::Index>(n)) = bands[n](b.kPath[i].x);
    }
    b.provenance.geometryHash = "synthetic";
    return b;
  };
  return pcw::StitchedDispersion::stitch(build(low), {0.10, 0.20}, build(high), {0.20, 0.35}, 232.5);
}

}  // namespace oracle
