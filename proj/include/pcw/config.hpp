#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pcw/analysis.hpp"
#include "pcw/phasematch.hpp"

namespace pcw {

struct StructureConfig {
  LatticeKind lattice = LatticeKind::Hexagonal;
  double holeRadius = 0.0;
  double epsBackground = 1.0;
  double epsHole = 1.0;
  std::optional<DefectSpec> defect;
  int supercellRows = 8;
  int resolution = kDefaultResolution;

  friend bool operator==(const StructureConfig&, const StructureConfig&) = default;
};

struct KPathConfig {
  std::vector<std::string> vertices;
  int segmentPoints = 16;

  friend bool operator==(const KPathConfig&, const KPathConfig&) = default;
};

struct KxGridConfig {
  int count = 51;
  double max = 0.5;

  friend bool operator==(const KxGridConfig&, const KxGridConfig&) = default;
};

struct SolverConfig {
  double cutoff = kDefaultCutoff;
  int numBands = kDefaultNumBands;
  Polarization polarization = Polarization::Even;
  FourierRule rule = FourierRule::InverseEpsMatrix;
  std::optional<KPathConfig> kPath;  // default: Gamma-M-K-Gamma / Gamma-X-M-Gamma
  KxGridConfig kxGrid;

  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

struct DualEpsConfig {
  double epsLow = 10.8;
  double epsHigh = 13.0;
  double lowWindowLo = 0.10, lowWindowHi = 0.20;
  double highWindowLo = 0.25, highWindowHi = 0.35;

  friend bool operator==(const DualEpsConfig&, const DualEpsConfig&) = default;
};

enum class MatchMode { Degenerate, Nondegenerate };

struct MatchConfig {
  double energyTol = kDefaultEnergyTol;
  double momentumTol = kDefaultMomentumTol;
  int mMin = -2;
  int mMax = 2;
  MatchMode mode = MatchMode::Degenerate;
  std::vector<int> pumpBands;
  std::vector<int> dcBands;
  std::uint64_t maxEvaluations = 500'000'000;
  bool refine = true;
  std::optional<std::string> lowBandsFile;
  std::optional<std::string> highBandsFile;

  friend bool operator==(const MatchConfig&, const MatchConfig&) = default;
};

struct GapMapConfig {
  std::vector<double> radii{0.25, 0.30, 0.35, 0.40, 0.45};
  int zoneDensity = 8;
  bool checkSampling = false;

  friend bool operator==(const GapMapConfig&, const GapMapConfig&) = default;
};

struct ProjectConfig {
  int transverseSamples = 16;
  double lightLineIndex = 1.0;

  friend bool operator==(const ProjectConfig&, const ProjectConfig&) = default;
};

struct OverlapMode {
  int band = 0;
  double k = 0.0;

  friend bool operator==(const OverlapMode&, const OverlapMode&) = default;
};

struct OverlapTriple {
  OverlapMode pump, signal, idler;

  friend bool operator==(const OverlapTriple&, const OverlapTriple&) = default;
};

struct OverlapConfig {
  double scalarWeight = 1.0;
  int limit = 20;  // match --overlap evaluates at most this many solutions
  std::vector<OverlapTriple> triples;

  friend bool operator==(const OverlapConfig&, const OverlapConfig&) = default;
};

struct OutputConfig {
  std::string directory = "out";
  std::vector<std::string> formats{"csv", "json"};

  bool wants(std::string_view format) const;
  friend bool operator==(const OutputConfig&, const OutputConfig&) = default;
};

struct RunConfig {
  StructureConfig structure;
  std::optional<double> latticeConstantNm;
  std::optional<int> threads;
  SolverConfig solver;
  std::optional<DualEpsConfig> dualEps;
  MatchConfig match;
  GapMapConfig gapmap;
  ProjectConfig project;
  OverlapConfig overlap;
  OutputConfig output;

  friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

struct SchemaIssue {
  std::string path;
  std::string message;
};

/// Validates a JSON document and returns every violation found (empty when valid).
std::vector<SchemaIssue> validateConfig(std::string_view document);

/// Parses and validates; throws SchemaViolation listing every issue as "path: message".
RunConfig parseConfig(std::string_view document);
RunConfig loadConfig(const std::string& path);

/// Canonical JSON with every default written out; parseConfig(emitConfig(c)) == c.
std::string emitConfig(const RunConfig& config);

/// FNV-1a of the canonical document, as 16 hex digits.
std::string configHash(const RunConfig& config);

/// Primitive structure described by the config (defect attached if configured).
StructureSpec structureFrom(const RunConfig& config, std::optional<double> epsBackground = std::nullopt);

SolverOptions solverOptionsFrom(const RunConfig& config);

std::vector<Vec2> kPathFrom(const RunConfig& config);
std::vector<double> kxGridFrom(const RunConfig& config);

}  // namespace pcw
