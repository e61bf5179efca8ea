#include "pcw/basis.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "pcw/error.hpp"

namespace pcw {

PlaneWaveBasis PlaneWaveBasis::build(const LatticeSpec& lattice, Vec2 k, double cutoff,
                                     const BasisLimits& limits) {
  if (!(cutoff > 0.0)) {
    throw Error(ErrorKind::InvalidArgument, fmt::format("cutoff must be positive, got {}", cutoff));
  }
  PlaneWaveBasis basis;
  basis.lattice_ = lattice;
  basis.center_ = k;
  basis.cutoff_ = cutoff;

  // n_i = (k+G).a_i - k.a_i, and |(k+G).a_i| <= cutoff * |a_i|.
  const auto kc = lattice.reciprocalCoordinates(k);
  const double reach1 = cutoff * norm(lattice.a1);
  const double reach2 = cutoff * norm(lattice.a2);
  int lo1 = static_cast<int>(std::floor(-reach1 - kc[0])) - 1;
  int hi1 = static_cast<int>(std::ceil(reach1 - kc[0])) + 1;
  int lo2 = static_cast<int>(std::floor(-reach2 - kc[1])) - 1;
  int hi2 = static_cast<int>(std::ceil(reach2 - kc[1])) + 1;
  if (limits.maxAbsN1) {
    lo1 = std::max(lo1, -*limits.maxAbsN1);
    hi1 = std::min(hi1, *limits.maxAbsN1);
  }
  if (limits.maxAbsN2) {
    lo2 = std::max(lo2, -*limits.maxAbsN2);
    hi2 = std::min(hi2, *limits.maxAbsN2);
  }

  // Relative slack so that points sitting on the cutoff sphere are kept
  // regardless of last-bit differences between equivalent k-points.
  const double limit = cutoff * (1.0 + 1e-9);
  struct Entry {
    long long key;
    GIndex g;
  };
  std::vector<Entry> entries;
  for (int n1 = lo1; n1 <= hi1; ++n1) {
    for (int n2 = lo2; n2 <= hi2; ++n2) {
      const double q = norm(k + lattice.reciprocal(n1, n2));
      if (q <= limit) entries.push_back({std::llround(q * 1e9), GIndex{n1, n2}});
    }
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    if (a.key != b.key) return a.key < b.key;
    return a.g < b.g;
  });
  basis.indices_.reserve(entries.size());
  for (const auto& e : entries) basis.indices_.push_back(e.g);
  if (basis.indices_.empty()) {
    throw Error(ErrorKind::InvalidArgument, "plane-wave basis is empty; raise the cutoff");
  }
  return basis;
}

Vec2 PlaneWaveBasis::wavevector(std::size_t i) const {
  return center_ + lattice_.reciprocal(indices_[i].n1, indices_[i].n2);
}

int PlaneWaveBasis::maxAbsIndex(int axis) const {
  int m = 0;
  for (const auto& g : indices_) m = std::max(m, std::abs(axis == 0 ? g.n1 : g.n2));
  return m;
}

}  // namespace pcw
