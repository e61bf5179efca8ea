// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "oracles.hpp"
#include "pcw/analysis.hpp"
#include "pcw/commands.hpp"
#include "pcw/config.hpp"
#include "pcw/output.hpp"
#include "pcw/overlap.hpp"
#include "pcw/parallel.hpp"
#include "pcw/phasematch.hpp"

using namespace pcw;
using Section = StitchedDispersion::Section;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& name, double limitSeconds, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, fmt::format("error: {}", e.what())};
  }
  const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (limitSeconds > 0.0 && elapsed > limitSeconds) {
    o.pass = false;
    o.detail += fmt::format("; runtime over the {:.0f} s limit", limitSeconds);
  }
  if (!o.pass) ++failures;
  fmt::print("{} {:2d} {}: {} ({:.2f} s)\n", o.pass ? "PASS" : "FAIL", id, name, o.detail, elapsed);
  std::fflush(stdout);
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Outcome emptyLattice() {
  std::mt19937 rng(2024);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  double worst = 0.0;
  int checked = 0;
  for (auto kind : {LatticeKind::Square, LatticeKind::Hexagonal}) {
    for (double eps : {1.0, 13.0}) {
      const BandSolver solver(rasterizeDielectric(perfectCrystal(kind, 0.0, eps), {64, 64}), kDefaultCutoff);
      for (int t = 0; t < 20; ++t) {
        const Vec2 k{u(rng), u(rng)};
        const auto expected = oracle::freeBands(solver.grid().lattice, k, eps, 10);
        for (auto pol : {Polarization::Even, Polarization::Odd}) {
          const auto got = solver.solve(k, pol, 10).frequencies;
          for (int n = 0; n < 10; ++n) {
            worst = std::max(worst, expected[n] > 0.0 ? rel(got[n], expected[n]) : std::abs(got[n]));
            ++checked;
          }
        }
      }
    }
  }
  return {worst < 1e-8, fmt::format("{} frequencies, max relative error {:.2e} (limit 1e-8)", checked, worst)};
}

Outcome stratified() {
  const auto grid = rasterizeStratified(buildLattice(LatticeKind::Square), {1024, 16}, 0.5, 13.0, 1.0);
  const BandSolver solver(grid, 128.0, FourierRule::InverseEpsMatrix, BasisLimits{std::nullopt, 0});
  const auto got = solver.solve({0.5, 0.0}, Polarization::Odd, 6).frequencies;
  const auto expected = oracle::transferMatrixEdges(13.0, 0.5, 1.0, 6);
  if (expected.size() != 6) return {false, "transfer-matrix scan found too few roots"};
  double worst = 0.0;
  for (int n = 0; n < 6; ++n) worst = std::max(worst, rel(got[n], expected[n]));
  return {worst < 1e-3, fmt::format("6 band edges at k = pi/a, max relative deviation {:.2e} (limit 1e-3)", worst)};
}

Outcome convergence() {
  const auto s = perfectCrystal(LatticeKind::Hexagonal, 0.38, 13.0);
  const auto ks = irreducibleZoneSampling(LatticeKind::Hexagonal, 8);
  SolverOptions base;
  base.resolution = 128;
  SolverOptions doubled = base;
  doubled.cutoff = 2.0 * kDefaultCutoff;
  const auto a = findGaps(bandSweep(s, Polarization::Even, ks, 6, base));
  const auto b = findGaps(bandSweep(s, Polarization::Even, ks, 6, doubled));
  if (a.empty() || b.empty()) return {false, "no even gap found"};
  const double dlo = rel(b[0].lo, a[0].lo), dhi = rel(b[0].hi, a[0].hi);
  return {std::max(dlo, dhi) < 5e-3,
          fmt::format("gap [{:.6f}, {:.6f}] -> [{:.6f}, {:.6f}], drift {:.3f}% / {:.3f}% (limit 0.5%)", a[0].lo,
                      a[0].hi, b[0].lo, b[0].hi, 100 * dlo, 100 * dhi)};
}

Outcome gapMonotonicity() {
  const auto s = perfectCrystal(LatticeKind::Hexagonal, 0.25, 13.0);
  const std::vector<double> radii{0.25, 0.30, 0.35, 0.40, 0.45};
  const auto map = gapMap(s, radii, Polarization::Even, 8, 8);
  std::string edges;
  bool ok = true;
  double previous = 0.0;
  for (const auto& e : map.entries) {
    if (e.gaps.empty()) {
      edges += fmt::format(" r={:.2f}: none", e.radius);
      ok = false;
      continue;
    }
    edges += fmt::format(" r={:.2f}: {:.5f}", e.radius, e.gaps[0].lo);
    if (e.gaps[0].lo < previous) ok = false;
    previous = e.gaps[0].lo;
  }
  return {ok, "lower edges" + edges};
}

Outcome conservation() {
  const RunConfig c = loadConfig(PCW_TEST_DATA "/waveguide_fixture.json");
  const auto& d = *c.dualEps;
  const auto disp = StitchedDispersion::stitch(loadBandsCsv(PCW_TEST_DATA "/" + *c.match.lowBandsFile),
                                               {d.lowWindowLo, d.lowWindowHi},
                                               loadBandsCsv(PCW_TEST_DATA "/" + *c.match.highBandsFile),
                                               {d.highWindowLo, d.highWindowHi}, c.latticeConstantNm);
  const auto degenerate = findDegenerateMatches(disp);
  const auto full = findNondegenerateMatches(disp);
  double worstE = 0.0, worstK = 0.0, worstIdentity = 0.0;
  for (const auto* set : {&degenerate, &full}) {
    for (const auto& s : *set) {
      worstE = std::max(worstE, s.energyResidual);
      worstK = std::max(worstK, s.momentumResidual);
    }
  }
  int coPropagating = 0;
  const MatchSolution* nearest = nullptr;
  for (const auto& s : degenerate) {
    if (s.signal.k != s.idler.k) continue;
    ++coPropagating;
    worstIdentity = std::max(worstIdentity, std::abs(s.pump.k - (2.0 * s.signal.k - s.m)));
    if (s.m == 0 && (!nearest || std::abs(s.signal.k - 0.22) < std::abs(nearest->signal.k - 0.22))) nearest = &s;
  }
  const bool ok = !degenerate.empty() && worstE <= 1e-4 && worstK <= 1e-9 && worstIdentity <= 1e-12;
  std::string anchor = nearest ? fmt::format("; m=0 solution nearest the anchor: k1={:.4f}, kp={:.4f}",
                                             nearest->signal.k, nearest->pump.k)
                               : "";
  return {ok, fmt::format("{} degenerate ({} co-propagating) + {} nondegenerate solutions, max energy residual "
                          "{:.1e}, max momentum residual {:.1e}, max |kp - (2k1 - m)| {:.1e}{}",
                          degenerate.size(), coPropagating, full.size(), worstE, worstK, worstIdentity, anchor)};
}

Outcome bruteForce() {
  const auto disp = oracle::syntheticDispersion();
  bool ok = true;
  std::string detail;
  for (double tol : {1e-4, 2e-3}) {
    MatchOptions o;
    o.energyTol = tol;
    const auto fast = findNondegenerateMatches(disp, o);
    const auto exhaustive = oracle::bruteForceMatches(disp, o);
    const bool same = fast.size() == exhaustive.size() && oracle::keys(fast) == exhaustive;
    ok = ok && same;
    detail += fmt::format("{}tol {:.0e}: {} vs {} solutions{}", detail.empty() ? "" : "; ", tol, fast.size(),
                          exhaustive.size(), same ? "" : " (differ)");
  }
  return {ok, detail};
}

Outcome overlapInvariance() {
  const auto grid = rasterizeDielectric(perfectCrystal(LatticeKind::Hexagonal, 0.38, 13.0), {64, 64});
  const auto region = NonlinearRegion::fromGrid(grid);
  const BandSolver solver(grid, kDefaultCutoff);
  const auto mode = [&](Vec2 k, Polarization pol, int band) {
    return solver.solve(k, pol, band + 1, true).modes[static_cast<std::size_t>(band)];
  };
  const auto lattice = grid.lattice;
  const Vec2 ks{0.3, 0.1}, ki{0.4, 0.05};
  const auto p = mode(ks + ki - lattice.reciprocal(1, 0), Polarization::Even, 2);
  const auto s = mode(ks, Polarization::Even, 0);
  const auto i = mode(ki, Polarization::Even, 1);
  const auto base = overlapCoefficients(p, s, i, region);

  std::mt19937 rng(99);
  std::uniform_real_distribution<double> u(0.0, 2.0 * std::numbers::pi);
  double gauge = 0.0;
  for (int t = 0; t < 20; ++t) {
    auto pp = p, ss = s, ii = i;
    pp.e *= std::polar(1.0, u(rng));
    ss.e *= std::polar(1.0, u(rng));
    ii.e *= std::polar(1.0, u(rng));
    gauge = std::max(gauge, rel(overlapCoefficients(pp, ss, ii, region).magnitude, base.magnitude));
  }
  const double dual = std::abs(overlapQuadrature(p, s, i, region).value - base.value) / base.magnitude;

  const auto uniformGrid = rasterizeDielectric(perfectCrystal(LatticeKind::Hexagonal, 0.0, 1.0), {64, 64});
  const BandSolver vacuum(uniformGrid, kDefaultCutoff);
  const auto up = vacuum.solve({0.10, 0.0}, Polarization::Even, 1, true).modes[0];
  const auto us = vacuum.solve({0.05, 0.0}, Polarization::Even, 1, true).modes[0];
  const double area = lattice.cellArea();
  const double closed = 1.0 / (std::sqrt(1.0) * std::sqrt(area));
  const double uniform = rel(overlapIntegral(up, us, us, NonlinearRegion::fromGrid(uniformGrid)).magnitude, closed);

  const bool ok = base.magnitude > 0.0 && gauge < 1e-12 && dual < 1e-8 && uniform < 1e-10;
  return {ok, fmt::format("gauge {:.1e} (limit 1e-12), real vs coefficient space {:.1e} (limit 1e-8), "
                          "uniform eps=1 closed form {:.1e} (limit 1e-10)",
                          gauge, dual, uniform)};
}

Outcome dgdFormula() {
  const double a = *dgd(0.2, 0.25);
  const double ps = dgdPsPerMm(a);
  const double same = *dgd(0.25, 0.25);
  const double counter = *dgd(0.25, -0.25);
  const bool ok = std::abs(a - 1.0) < 1e-15 && std::abs(ps - 3.336) < 5e-4 && same == 0.0 && counter == 8.0 &&
                  !dgd(0.0, 0.25);
  return {ok, fmt::format("dgd(0.2,0.25)={} ({} ps/mm), dgd(u,u)={}, dgd(0.25,-0.25)={}", formatNumber(a),
                          formatNumber(ps), formatNumber(same), formatNumber(counter))};
}

Outcome wavelength() {
  const auto disp = oracle::syntheticDispersion();
  const std::string a = formatNumber(*disp.wavelengthNm(0.30));
  const std::string b = formatNumber(*disp.wavelengthNm(0.15));
  return {a == "775" && b == "1550", fmt::format("a = 232.5 nm: 0.30 -> {} nm, 0.15 -> {} nm", a, b)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome determinism() {
  RunConfig c = parseConfig(R"({
    "lattice": "hexagonal", "hole_radius": 0.38, "eps_background": 13,
    "defect": {"missing_rows": 1, "width_scale": 1.0}, "supercell_rows": 6, "resolution": 32,
    "lattice_constant_nm": 232.5,
    "solver": {"cutoff": 3, "num_bands": 8, "kx_grid": {"count": 5, "max": 0.5}, "k_path": {"vertices": ["Gamma", "M", "K", "Gamma"], "segment_points": 4}},
    "dual_eps": {"eps_low": 10.8, "eps_high": 13.0, "low_window": [0.05, 0.2], "high_window": [0.2, 0.5]},
    "match": {"energy_tol": 0.01},
    "gapmap": {"radii": [0.3, 0.4], "zone_density": 3},
    "project": {"transverse_samples": 8},
    "overlap": {"triples": [{"pump": {"band": 3, "k": 0.5}, "signal": {"band": 0, "k": 0.25}, "idler": {"band": 1, "k": 0.25}}]},
    "output": {"formats": ["csv", "json"]}
  })");
  const fs::path root = fs::temp_directory_path() / "pcw_acceptance_determinism";
  fs::remove_all(root);
  std::ostringstream log;
  int compared = 0;
  std::vector<std::string> differing;
  for (const auto& name : commandNames()) {
    std::vector<std::vector<fs::path>> runs;
    for (int r = 0; r < 2; ++r) {
      CommandOptions o;
      o.outDirectory = root / fmt::format("{}_{}", name, r);
      o.overlap = name == "match";
      runs.push_back(runCommand(name, c, o, log));
    }
    for (std::size_t f = 0; f < runs[0].size(); ++f) {
      if (runs[0][f].filename().string().find(".provenance.") != std::string::npos) continue;
      ++compared;
      if (slurp(runs[0][f]) != slurp(runs[1][f])) differing.push_back(runs[0][f].filename().string());
    }
  }
  fs::remove_all(root);
  std::string detail = fmt::format("{} files from {} commands compared byte for byte", compared, commandNames().size());
  for (const auto& d : differing) detail += "; differs: " + d;
  return {differing.empty() && compared > 0, detail};
}

}  // namespace

int main() {
  pinBlasThreads();
  criterion(1, "empty-lattice exactness", 10, emptyLattice);
  criterion(2, "1D transfer-matrix oracle", 30, stratified);
  criterion(3, "cutoff convergence", 300, convergence);
  criterion(4, "gap-map monotonicity", 900, gapMonotonicity);
  criterion(5, "phase-match conservation", 60, conservation);
  criterion(6, "brute-force match oracle", 60, bruteForce);
  criterion(7, "overlap gauge and representation invariance", 0, overlapInvariance);
  criterion(8, "DGD formula", 0, dgdFormula);
  criterion(9, "wavelength reduction", 0, wavelength);
  criterion(10, "determinism", 0, determinism);
  fmt::print("{} of 10 criteria passed\n", 10 - failures);
  return failures == 0 ? 0 : 1;
}
