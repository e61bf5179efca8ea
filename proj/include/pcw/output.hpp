#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pcw/analysis.hpp"
#include "pcw/config.hpp"
#include "pcw/overlap.hpp"
#include "pcw/phasematch.hpp"

namespace pcw {

inline constexpr std::string_view kToolVersion = "0.1.0";

/// Decimal text with 12 significant digits; the single formatting rule for
/// every emitted number.
std::string formatNumber(double value);

/// The value a reader gets back from formatNumber's text.
double roundTo12(double value);

/// Key/value pairs written as the leading "# ..." line of every CSV file and
/// the "provenance" object of every JSON file.
using ProvenanceFields = std::map<std::string, std::string>;

ProvenanceFields bandProvenance(const BandStructure& bands);

std::string bandsCsv(const BandStructure& bands, const ProvenanceFields& provenance,
                     std::optional<double> latticeConstantNm);
std::string bandsJson(const BandStructure& bands, const ProvenanceFields& provenance,
                      std::optional<double> latticeConstantNm);

/// Reads a band CSV written by bandsCsv. Frequencies come back at 12
/// significant digits; provenance (hashes, cutoff, rule, ...) is restored.
BandStructure readBandsCsv(const std::string& text);
BandStructure loadBandsCsv(const std::filesystem::path& path);

std::string gapMapCsv(const GapMap& map, const ProvenanceFields& provenance);
std::string projectedBandsJson(const ProjectedBands& pb, const ProvenanceFields& provenance);
std::string classificationCsv(const DefectModeClassification& c, const ProvenanceFields& provenance);

std::string matchesCsv(const std::vector<MatchSolution>& solutions, const ProvenanceFields& provenance,
                       std::optional<double> latticeConstantNm);
std::string matchesJson(const std::vector<MatchSolution>& solutions, const ProvenanceFields& provenance,
                        std::optional<double> latticeConstantNm);

struct OverlapRecord {
  OverlapMode pump, signal, idler;
  double pumpOmega = 0.0, signalOmega = 0.0, idlerOmega = 0.0;
  OverlapResult result;
};

std::string overlapsCsv(const std::vector<OverlapRecord>& records, const ProvenanceFields& provenance);
std::string overlapsJson(const std::vector<OverlapRecord>& records, const ProvenanceFields& provenance);

/// Files written by one command. Unless commit() is called, every file the
/// session created is removed when it is destroyed.
class OutputSession {
 public:
  explicit OutputSession(std::filesystem::path directory);
  ~OutputSession();

  OutputSession(const OutputSession&) = delete;
  OutputSession& operator=(const OutputSession&) = delete;

  void write(const std::string& name, const std::string& contents);
  void commit() { committed_ = true; }
  const std::vector<std::filesystem::path>& files() const { return files_; }
  const std::filesystem::path& directory() const { return directory_; }

 private:
  std::filesystem::path directory_;
  std::vector<std::filesystem::path> files_;
  bool committed_ = false;
};

}  // namespace pcw
