#include "pcw/commands.hpp"

#include <fmt/chrono.h>
#include <fmt/format.h>

#include <chrono>
#include <cstdlib>
#include <map>

#include "json.hpp"
#include "pcw/error.hpp"
#include "pcw/output.hpp"

namespace pcw {
namespace {

using Section = StitchedDispersion::Section;

struct Context {
  const RunConfig& config;
  const CommandOptions& options;
  std::ostream& log;
  std::string command;
  OutputSession& out;

  ProvenanceFields provenance(ProvenanceFields extra = {}) const {
    extra["tool"] = "pcw";
    extra["version"] = std::string(kToolVersion);
    extra["command"] = command;
    extra["config_hash"] = configHash(config);
    return extra;
  }
};

StructureSpec perfect(const RunConfig& config, std::optional<double> eps = std::nullopt) {
  StructureSpec s = structureFrom(config, eps);
  s.defect.reset();
  return s;
}

// Structure whose bands live on the guide axis: the defect supercell when a
// defect is configured, the primitive crystal otherwise.
StructureSpec guideStructure(const RunConfig& config, std::optional<double> eps = std::nullopt) {
  const StructureSpec s = structureFrom(config, eps);
  return s.defect ? makeSupercell(s) : s;
}

std::vector<Vec2> guideKPoints(const RunConfig& config) {
  return kxLine(config.solver.kxGrid.count, config.solver.kxGrid.max);
}

void writeBands(Context& ctx, const std::string& stem, const BandStructure& bands) {
  ProvenanceFields p = ctx.provenance(bandProvenance(bands));
  if (ctx.config.output.wants("csv")) ctx.out.write(stem + ".csv", bandsCsv(bands, p, ctx.config.latticeConstantNm));
  if (ctx.config.output.wants("json")) ctx.out.write(stem + ".json", bandsJson(bands, p, ctx.config.latticeConstantNm));
}

void runBands(Context& ctx) {
  const auto& c = ctx.config;
  const auto ks = kPathFrom(c);
  ctx.log << fmt::format("bands: {} k-points, {} bands, cutoff {}\n", ks.size(), c.solver.numBands, c.solver.cutoff);
  const BandStructure bands = bandSweep(perfect(c), c.solver.polarization, ks, c.solver.numBands, solverOptionsFrom(c));
  writeBands(ctx, "bands", bands);
}

void runGapMap(Context& ctx) {
  const auto& c = ctx.config;
  ctx.log << fmt::format("gapmap: {} radii, zone density {}\n", c.gapmap.radii.size(), c.gapmap.zoneDensity);
  const GapMap map = gapMap(perfect(c), c.gapmap.radii, c.solver.polarization, c.gapmap.zoneDensity,
                            c.solver.numBands, solverOptionsFrom(c), c.gapmap.checkSampling);
  ctx.out.write("gapmap.csv", gapMapCsv(map, ctx.provenance({{"polarization", std::string(to_string(map.polarization))}})));
}

ProjectedBands projection(const RunConfig& c) {
  const auto grid = kxGridFrom(c);
  return lightConeMask(projectBands(perfect(c), c.solver.polarization, grid, c.project.transverseSamples,
                                    c.solver.numBands, solverOptionsFrom(c)),
                       c.project.lightLineIndex);
}

void runProject(Context& ctx) {
  const auto& c = ctx.config;
  ctx.log << fmt::format("project: {} kx x {} transverse samples\n", c.solver.kxGrid.count, c.project.transverseSamples);
  ctx.out.write("projected_bands.json", projectedBandsJson(projection(c), ctx.provenance()));
}

BandStructure guideBands(const RunConfig& c, std::optional<double> eps, bool retain = false) {
  SolverOptions o = solverOptionsFrom(c);
  o.retainModes = retain;
  const auto ks = guideKPoints(c);
  return bandSweep(guideStructure(c, eps), c.solver.polarization, ks, c.solver.numBands, o);
}

void runDefectBands(Context& ctx) {
  const auto& c = ctx.config;
  if (!c.structure.defect) {
    throw Error(ErrorKind::InvalidArgument, "defect-bands needs a 'defect' section in the config");
  }
  ctx.log << fmt::format("defect-bands: {} rows, {} kx points\n", c.structure.supercellRows, c.solver.kxGrid.count);
  const BandStructure bands = guideBands(c, std::nullopt);
  writeBands(ctx, "defect_bands", bands);
  const DefectModeClassification labels = classifyDefectModes(bands, projection(c));
  ctx.out.write("classification.csv", classificationCsv(labels, ctx.provenance(bandProvenance(bands))));
  if (c.dualEps) {
    writeBands(ctx, "defect_bands_low", guideBands(c, c.dualEps->epsLow));
    writeBands(ctx, "defect_bands_high", guideBands(c, c.dualEps->epsHigh));
  }
}

StitchedDispersion dispersion(const Context& ctx) {
  const auto& c = ctx.config;
  if (!c.dualEps) throw Error(ErrorKind::InvalidArgument, "match needs a 'dual_eps' section in the config");
  const auto& d = *c.dualEps;
  BandStructure low, high;
  if (c.match.lowBandsFile && c.match.highBandsFile) {
    const auto resolve = [&](const std::string& p) {
      const std::filesystem::path path(p);
      return path.is_absolute() ? path : ctx.options.configDirectory / path;
    };
    low = loadBandsCsv(resolve(*c.match.lowBandsFile));
    high = loadBandsCsv(resolve(*c.match.highBandsFile));
  } else {
    low = guideBands(c, d.epsLow);
    high = guideBands(c, d.epsHigh);
  }
  return StitchedDispersion::stitch(std::move(low), {d.lowWindowLo, d.lowWindowHi}, std::move(high),
                                    {d.highWindowLo, d.highWindowHi}, c.latticeConstantNm);
}

// Solves and caches Bloch modes on the guide axis for one dielectric constant.
class ModeCache {
 public:
  ModeCache(const RunConfig& c, double eps)
      : structure_(guideStructure(c, eps)),
        solver_(rasterizeDielectric(structure_, meshFor(structure_, c.structure.resolution)), c.solver.cutoff,
                c.solver.rule),
        polarization_(c.solver.polarization) {}

  BlochMode mode(int band, double kx) {
    auto it = cache_.find(kx);
    if (it == cache_.end() || static_cast<int>(it->second.modes.size()) <= band) {
      const int count = std::max(band + 1, it == cache_.end() ? 0 : static_cast<int>(it->second.modes.size()));
      it = cache_.insert_or_assign(kx, solver_.solve({kx, 0.0}, polarization_, count, true)).first;
    }
    return it->second.modes[static_cast<std::size_t>(band)];
  }

 private:
  StructureSpec structure_;
  BandSolver solver_;
  Polarization polarization_;
  std::map<double, KPointSolution> cache_;
};

NonlinearRegion regionFor(const RunConfig& c) {
  const StructureSpec s = guideStructure(c);
  return NonlinearRegion::fromGrid(rasterizeDielectric(s, meshFor(s, c.structure.resolution)), c.overlap.scalarWeight);
}

double pumpEps(const RunConfig& c) { return c.dualEps ? c.dualEps->epsHigh : c.structure.epsBackground; }
double downEps(const RunConfig& c) { return c.dualEps ? c.dualEps->epsLow : c.structure.epsBackground; }

void runMatch(Context& ctx) {
  const auto& c = ctx.config;
  const MatchMode mode = ctx.options.matchMode.value_or(c.match.mode);
  const StitchedDispersion disp = dispersion(ctx);
  MatchOptions o;
  o.energyTol = c.match.energyTol;
  o.momentumTol = c.match.momentumTol;
  o.mMin = c.match.mMin;
  o.mMax = c.match.mMax;
  o.pumpBands = c.match.pumpBands;
  o.dcBands = c.match.dcBands;
  o.refine = c.match.refine;
  o.maxEvaluations = c.match.maxEvaluations;
  std::vector<MatchSolution> solutions =
      mode == MatchMode::Degenerate ? findDegenerateMatches(disp, o) : findNondegenerateMatches(disp, o);
  ctx.log << fmt::format("match: {} {} solutions\n", solutions.size(),
                         mode == MatchMode::Degenerate ? "degenerate" : "nondegenerate");

  if (ctx.options.overlap && !solutions.empty()) {
    ModeCache pumpModes(c, pumpEps(c));
    ModeCache downModes(c, downEps(c));
    const NonlinearRegion region = regionFor(c);
    const std::size_t count = std::min(solutions.size(), static_cast<std::size_t>(c.overlap.limit));
    ctx.log << fmt::format("match: overlap for {} of {} solutions\n", count, solutions.size());
    for (std::size_t i = 0; i < count; ++i) {
      auto& s = solutions[i];
      const BlochMode p = pumpModes.mode(s.pump.band, s.pump.k);
      const BlochMode a = downModes.mode(s.signal.band, s.signal.k);
      const BlochMode b = downModes.mode(s.idler.band, s.idler.k);
      if (!p.hasField() || !a.hasField() || !b.hasField()) continue;
      const OverlapResult r = overlapIntegral(p, a, b, region);
      s.overlapMagnitude = r.magnitude;
      s.overlapPhase = r.phase;
    }
  }

  ProvenanceFields p = ctx.provenance({{"mode", mode == MatchMode::Degenerate ? "degenerate" : "nondegenerate"},
                                       {"low_geometry_hash", disp.bands(Section::Low).provenance.geometryHash},
                                       {"solutions", std::to_string(solutions.size())}});
  if (c.output.wants("json")) ctx.out.write("matches.json", matchesJson(solutions, p, c.latticeConstantNm));
  if (c.output.wants("csv")) ctx.out.write("matches.csv", matchesCsv(solutions, p, c.latticeConstantNm));
}

void runOverlap(Context& ctx) {
  const auto& c = ctx.config;
  if (c.overlap.triples.empty()) throw Error(ErrorKind::InvalidArgument, "overlap needs overlap.triples in the config");
  ModeCache pumpModes(c, pumpEps(c));
  ModeCache downModes(c, downEps(c));
  const NonlinearRegion region = regionFor(c);
  std::vector<OverlapRecord> records;
  for (const auto& t : c.overlap.triples) {
    const BlochMode p = pumpModes.mode(t.pump.band, t.pump.k);
    const BlochMode a = downModes.mode(t.signal.band, t.signal.k);
    const BlochMode b = downModes.mode(t.idler.band, t.idler.k);
    OverlapRecord r{t.pump, t.signal, t.idler, p.frequency, a.frequency, b.frequency, {}};
    r.result = overlapIntegral(p, a, b, region);
    records.push_back(r);
  }
  ctx.log << fmt::format("overlap: {} triples\n", records.size());
  const ProvenanceFields p = ctx.provenance();
  if (c.output.wants("json")) ctx.out.write("overlaps.json", overlapsJson(records, p));
  if (c.output.wants("csv")) ctx.out.write("overlaps.csv", overlapsCsv(records, p));
}

std::string provenanceDocument(const Context& ctx, const std::vector<std::filesystem::path>& files) {
  const auto& c = ctx.config;
  nlohmann::ordered_json doc;
  doc["tool"] = "pcw";
  doc["version"] = kToolVersion;
  doc["command"] = ctx.command;
  doc["config_hash"] = configHash(c);
  doc["created_utc"] = fmt::format("{:%Y-%m-%dT%H:%M:%SZ}", fmt::gmtime(std::time(nullptr)));
  doc["convergence"] = {{"cutoff", c.solver.cutoff},
                        {"resolution", c.structure.resolution},
                        {"rule", to_string(c.solver.rule)},
                        {"num_bands", c.solver.numBands}};
  nlohmann::ordered_json names = nlohmann::ordered_json::array();
  for (const auto& f : files) names.push_back(f.filename().string());
  doc["files"] = names;
  doc["config"] = nlohmann::ordered_json::parse(emitConfig(c));
  return doc.dump(2) + "\n";
}

}  // namespace

const std::vector<std::string>& commandNames() {
  static const std::vector<std::string> names{"bands", "gapmap", "project", "defect-bands", "match", "overlap"};
  return names;
}

std::vector<std::filesystem::path> runCommand(std::string_view name, const RunConfig& config,
                                              const CommandOptions& options, std::ostream& log) {
  using Runner = void (*)(Context&);
  static const std::map<std::string, Runner, std::less<>> runners{
      {"bands", runBands},          {"gapmap", runGapMap}, {"project", runProject},
      {"defect-bands", runDefectBands}, {"match", runMatch},   {"overlap", runOverlap}};
  const auto it = runners.find(name);
  if (it == runners.end()) throw Error(ErrorKind::InvalidArgument, fmt::format("unknown command '{}'", name));

  if (config.threads && !std::getenv("PCW_THREADS")) setWorkerCount(*config.threads);
  OutputSession out(options.outDirectory.value_or(std::filesystem::path(config.output.directory)));
  Context ctx{config, options, log, std::string(name), out};
  try {
    it->second(ctx);
    std::vector<std::filesystem::path> files = out.files();
    out.write(std::string(name) + ".provenance.json", provenanceDocument(ctx, files));
  } catch (const Error& e) {
    throw Error(e.kind(), fmt::format("{}: {}", name, e.detail()));
  }
  out.commit();
  return out.files();
}

}  // namespace pcw
