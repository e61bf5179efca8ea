#include "pcw/output.hpp"

#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pcw/error.hpp"

namespace pcw {
namespace {

// Insertion-ordered so that documents list fields in a fixed, readable order.
using json = nlohmann::ordered_json;

json num(double v) {
  if (!std::isfinite(v)) return nullptr;
  return roundTo12(v);
}

json num(const std::optional<double>& v) { return v ? num(*v) : json(nullptr); }

std::string field(const std::optional<double>& v) { return v && std::isfinite(*v) ? formatNumber(*v) : ""; }

std::string header(const ProvenanceFields& provenance) {
  std::string line = "#";
  for (const auto& [k, v] : provenance) line += fmt::format(" {}={}", k, v);
  return line + "\n";
}

json provenanceJson(const ProvenanceFields& provenance) {
  json out = json::object();
  for (const auto& [k, v] : provenance) out[k] = v;
  return out;
}

std::string exact(double v) { return fmt::format("{:.17g}", v); }

std::optional<double> wavelength(std::optional<double> a, double omega) {
  if (!a || omega <= 0.0) return std::nullopt;
  return *a / omega;
}

std::vector<std::string> splitCsv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parseDouble(const std::string& text, const std::string& what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(text, &used);
    if (used != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw Error(ErrorKind::IoFailure, fmt::format("band CSV: cannot parse {} '{}'", what, text));
  }
}

Vec2 parseVector(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw Error(ErrorKind::IoFailure, fmt::format("bad vector '{}'", text));
  return {parseDouble(text.substr(0, colon), "vector"), parseDouble(text.substr(colon + 1), "vector")};
}

}  // namespace

std::string formatNumber(double value) {
  if (value == 0.0) return "0";  // no "-0"
  return fmt::format("{:.12g}", value);
}

double roundTo12(double value) { return std::stod(formatNumber(value)); }

ProvenanceFields bandProvenance(const BandStructure& bands) {
  const auto& p = bands.provenance;
  return {{"structure_hash", p.structureHash.empty() ? "-" : p.structureHash},
          {"geometry_hash", p.geometryHash.empty() ? "-" : p.geometryHash},
          {"cutoff", exact(p.cutoff)},
          {"rule", std::string(to_string(p.rule))},
          {"resolution", fmt::format("{}x{}", p.resolution.n1, p.resolution.n2)},
          {"eps_background", exact(p.epsBackground)},
          {"polarization", std::string(to_string(bands.polarization))},
          {"lattice", std::string(to_string(bands.lattice.kind))},
          {"a1", exact(bands.lattice.a1.x) + ":" + exact(bands.lattice.a1.y)},
          {"a2", exact(bands.lattice.a2.x) + ":" + exact(bands.lattice.a2.y)}};
}

std::string bandsCsv(const BandStructure& bands, const ProvenanceFields& provenance,
                     std::optional<double> a) {
  std::string out = header(provenance);
  out += a ? "k_index,kx,ky,band,omega,wavelength_nm\n" : "k_index,kx,ky,band,omega\n";
  for (std::size_t i = 0; i < bands.numK(); ++i) {
    for (int b = 0; b < bands.numBands(); ++b) {
      const double w = bands.frequencies(static_cast<Eigen::Index>(i), b);
      out += fmt::format("{},{},{},{},{}", i, formatNumber(bands.kPath[i].x), formatNumber(bands.kPath[i].y), b,
                         formatNumber(w));
      if (a) out += "," + field(wavelength(a, w));
      out += "\n";
    }
  }
  return out;
}

std::string bandsJson(const BandStructure& bands, const ProvenanceFields& provenance,
                      std::optional<double> a) {
  json doc;
  doc["provenance"] = provenanceJson(provenance);
  doc["polarization"] = to_string(bands.polarization);
  doc["num_bands"] = bands.numBands();
  json points = json::array();
  for (const Vec2& k : bands.kPath) points.push_back({num(k.x), num(k.y)});
  doc["k_points"] = points;
  json omega = json::array();
  json lambda = json::array();
  for (std::size_t i = 0; i < bands.numK(); ++i) {
    json row = json::array();
    json lrow = json::array();
    for (int b = 0; b < bands.numBands(); ++b) {
      const double w = bands.frequencies(static_cast<Eigen::Index>(i), b);
      row.push_back(num(w));
      lrow.push_back(num(wavelength(a, w)));
    }
    omega.push_back(row);
    lambda.push_back(lrow);
  }
  doc["omega"] = omega;
  if (a) {
    doc["lattice_constant_nm"] = num(*a);
    doc["wavelength_nm"] = lambda;
  }
  return doc.dump(2) + "\n";
}

BandStructure readBandsCsv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  ProvenanceFields prov;
  if (!std::getline(in, line) || line.rfind("#", 0) != 0) {
    throw Error(ErrorKind::IoFailure, "band CSV is missing its provenance line");
  }
  std::istringstream tokens(line.substr(1));
  std::string token;
  while (tokens >> token) {
    const auto eq = token.find('=');
    if (eq != std::string::npos) prov[token.substr(0, eq)] = token.substr(eq + 1);
  }
  if (!std::getline(in, line) || line.rfind("k_index,kx,ky,band,omega", 0) != 0) {
    throw Error(ErrorKind::IoFailure, "band CSV has an unexpected column header");
  }

  struct Row {
    std::size_t k;
    double kx, ky;
    int band;
    double omega;
  };
  std::vector<Row> rows;
  std::size_t nk = 0;
  int nb = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = splitCsv(line);
    if (cells.size() < 5) throw Error(ErrorKind::IoFailure, fmt::format("short band CSV row '{}'", line));
    Row r{static_cast<std::size_t>(parseDouble(cells[0], "k_index")), parseDouble(cells[1], "kx"),
          parseDouble(cells[2], "ky"), static_cast<int>(parseDouble(cells[3], "band")),
          parseDouble(cells[4], "omega")};
    nk = std::max(nk, r.k + 1);
    nb = std::max(nb, r.band + 1);
    rows.push_back(r);
  }
  if (rows.size() != nk * static_cast<std::size_t>(nb)) {
    throw Error(ErrorKind::IoFailure, "band CSV does not hold a complete k x band table");
  }

  BandStructure bands;
  bands.kPath.resize(nk);
  bands.frequencies.resize(static_cast<Eigen::Index>(nk), nb);
  for (const Row& r : rows) {
    bands.kPath[r.k] = {r.kx, r.ky};
    bands.frequencies(static_cast<Eigen::Index>(r.k), r.band) = r.omega;
  }
  const auto get = [&](const std::string& key) -> std::string {
    const auto it = prov.find(key);
    return it == prov.end() ? std::string() : it->second;
  };
  auto& p = bands.provenance;
  p.structureHash = get("structure_hash") == "-" ? "" : get("structure_hash");
  p.geometryHash = get("geometry_hash") == "-" ? "" : get("geometry_hash");
  if (!get("cutoff").empty()) p.cutoff = parseDouble(get("cutoff"), "cutoff");
  if (!get("rule").empty()) p.rule = fourierRuleFromString(get("rule"));
  if (!get("eps_background").empty()) p.epsBackground = parseDouble(get("eps_background"), "eps_background");
  if (const auto res = get("resolution"); !res.empty()) {
    const auto x = res.find('x');
    p.resolution = {static_cast<int>(parseDouble(res.substr(0, x), "resolution")),
                    static_cast<int>(parseDouble(res.substr(x + 1), "resolution"))};
  }
  if (!get("polarization").empty()) bands.polarization = polarizationFromString(get("polarization"));
  if (!get("a1").empty() && !get("a2").empty()) {
    const LatticeKind kind = get("lattice").empty() ? LatticeKind::Supercell : latticeKindFromString(get("lattice"));
    bands.lattice = latticeFromBasis(kind, parseVector(get("a1")), parseVector(get("a2")));
  }
  return bands;
}

BandStructure loadBandsCsv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, fmt::format("cannot read band file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return readBandsCsv(buffer.str());
}

std::string gapMapCsv(const GapMap& map, const ProvenanceFields& provenance) {
  std::string out = header(provenance) + "radius,gap_lo,gap_hi\n";
  for (const auto& e : map.entries) {
    if (e.gaps.empty()) out += formatNumber(e.radius) + ",,\n";
    for (const auto& g : e.gaps) {
      out += fmt::format("{},{},{}\n", formatNumber(e.radius), formatNumber(g.lo), formatNumber(g.hi));
    }
  }
  return out;
}

std::string projectedBandsJson(const ProjectedBands& pb, const ProvenanceFields& provenance) {
  json doc;
  doc["provenance"] = provenanceJson(provenance);
  doc["lattice"] = to_string(pb.lattice);
  doc["polarization"] = to_string(pb.polarization);
  doc["transverse_samples"] = pb.transverseSamples;
  doc["light_line_index"] = num(pb.lightLineIndex);
  json kx = json::array();
  json line = json::array();
  json allowed = json::array();
  for (std::size_t i = 0; i < pb.kxGrid.size(); ++i) {
    kx.push_back(num(pb.kxGrid[i]));
    line.push_back(num(pb.lightLine(i)));
    json intervals = json::array();
    for (const auto& iv : pb.allowed[i]) intervals.push_back({num(iv.lo), num(iv.hi)});
    allowed.push_back(intervals);
  }
  doc["kx"] = kx;
  doc["light_line"] = line;
  doc["allowed"] = allowed;
  return doc.dump(2) + "\n";
}

std::string classificationCsv(const DefectModeClassification& c, const ProvenanceFields& provenance) {
  std::string out = header(provenance) + "kx,band,omega,label\n";
  for (const auto& m : c.modes) {
    out += fmt::format("{},{},{},{}\n", formatNumber(m.kx), m.band, formatNumber(m.omega), to_string(m.label));
  }
  return out;
}

std::string matchesCsv(const std::vector<MatchSolution>& solutions, const ProvenanceFields& provenance,
                       std::optional<double> a) {
  std::string out = header(provenance);
  out +=
      "pump_band,k_p,omega_p,signal_band,k_1,omega_1,idler_band,k_2,omega_2,m,energy_residual,"
      "momentum_residual,u_pump,u_1,u_2,dgd,dgd_pump_signal,dgd_pump_idler,dgd_signal_idler,"
      "counter_propagating,degenerate,overlap_abs,overlap_phase";
  out += a ? ",lambda_p_nm,lambda_1_nm,lambda_2_nm,dgd_ps_per_mm\n" : "\n";
  for (const auto& s : solutions) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", s.pump.band,
                       formatNumber(s.pump.k), formatNumber(s.pump.omega), s.signal.band, formatNumber(s.signal.k),
                       formatNumber(s.signal.omega), s.idler.band, formatNumber(s.idler.k),
                       formatNumber(s.idler.omega), s.m, formatNumber(s.energyResidual),
                       formatNumber(s.momentumResidual), formatNumber(s.pump.velocity),
                       formatNumber(s.signal.velocity), formatNumber(s.idler.velocity), field(s.dgdPerLength),
                       field(s.dgdPumpSignal), field(s.dgdPumpIdler), field(s.dgdSignalIdler),
                       s.counterPropagating ? 1 : 0, s.degenerate ? 1 : 0, field(s.overlapMagnitude),
                       field(s.overlapPhase));
    if (a) {
      const std::optional<double> ps =
          s.dgdPerLength ? std::optional<double>(dgdPsPerMm(*s.dgdPerLength)) : std::nullopt;
      out += fmt::format(",{},{},{},{}", field(wavelength(a, s.pump.omega)), field(wavelength(a, s.signal.omega)),
                         field(wavelength(a, s.idler.omega)), field(ps));
    }
    out += "\n";
  }
  return out;
}

std::string matchesJson(const std::vector<MatchSolution>& solutions, const ProvenanceFields& provenance,
                        std::optional<double> a) {
  json doc;
  doc["provenance"] = provenanceJson(provenance);
  if (a) doc["lattice_constant_nm"] = num(*a);
  json list = json::array();
  for (const auto& s : solutions) {
    const auto mode = [&](const ModePoint& p) {
      json m;
      m["band"] = p.band;
      m["k"] = num(p.k);
      m["omega"] = num(p.omega);
      m["velocity"] = num(p.velocity);
      if (a) m["wavelength_nm"] = num(wavelength(a, p.omega));
      return m;
    };
    json r;
    r["pump"] = mode(s.pump);
    r["signal"] = mode(s.signal);
    r["idler"] = mode(s.idler);
    r["m"] = s.m;
    r["energy_residual"] = num(s.energyResidual);
    r["momentum_residual"] = num(s.momentumResidual);
    r["degenerate"] = s.degenerate;
    r["counter_propagating"] = s.counterPropagating;
    r["dgd"] = num(s.dgdPerLength);
    r["dgd_infinite"] = !s.dgdPerLength.has_value();
    r["dgd_pump_signal"] = num(s.dgdPumpSignal);
    r["dgd_pump_idler"] = num(s.dgdPumpIdler);
    r["dgd_signal_idler"] = num(s.dgdSignalIdler);
    if (a) r["dgd_ps_per_mm"] = s.dgdPerLength ? num(dgdPsPerMm(*s.dgdPerLength)) : json(nullptr);
    if (s.overlapMagnitude) {
      r["overlap"] = {{"magnitude", num(s.overlapMagnitude)}, {"phase", num(s.overlapPhase)}};
    }
    list.push_back(r);
  }
  doc["solutions"] = list;
  return doc.dump(2) + "\n";
}

std::string overlapsCsv(const std::vector<OverlapRecord>& records, const ProvenanceFields& provenance) {
  std::string out = header(provenance) +
                    "pump_band,k_p,omega_p,signal_band,k_1,omega_1,idler_band,k_2,omega_2,overlap_abs,"
                    "overlap_phase,momentum_conserved\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.pump.band, formatNumber(r.pump.k),
                       formatNumber(r.pumpOmega), r.signal.band, formatNumber(r.signal.k),
                       formatNumber(r.signalOmega), r.idler.band, formatNumber(r.idler.k),
                       formatNumber(r.idlerOmega), formatNumber(r.result.magnitude),
                       formatNumber(r.result.phase), r.result.momentumConserved ? 1 : 0);
  }
  return out;
}

std::string overlapsJson(const std::vector<OverlapRecord>& records, const ProvenanceFields& provenance) {
  json doc;
  doc["provenance"] = provenanceJson(provenance);
  json list = json::array();
  for (const auto& r : records) {
    const auto mode = [](const OverlapMode& m, double omega) {
      return json{{"band", m.band}, {"k", num(m.k)}, {"omega", num(omega)}};
    };
    json e;
    e["pump"] = mode(r.pump, r.pumpOmega);
    e["signal"] = mode(r.signal, r.signalOmega);
    e["idler"] = mode(r.idler, r.idlerOmega);
    e["magnitude"] = num(r.result.magnitude);
    e["phase"] = num(r.result.phase);
    e["momentum_conserved"] = r.result.momentumConserved;
    list.push_back(e);
  }
  doc["overlaps"] = list;
  return doc.dump(2) + "\n";
}

OutputSession::OutputSession(std::filesystem::path directory) : directory_(std::move(directory)) {
  std::error_code ec;
  std::filesystem::create_directories(directory_, ec);
  if (ec) {
    throw Error(ErrorKind::IoFailure,
                fmt::format("cannot create output directory '{}': {}", directory_.string(), ec.message()));
  }
}

OutputSession::~OutputSession() {
  if (committed_) return;
  for (const auto& f : files_) {
    std::error_code ec;
    std::filesystem::remove(f, ec);
  }
}

void OutputSession::write(const std::string& name, const std::string& contents) {
  const auto path = directory_ / name;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, fmt::format("cannot write '{}'", path.string()));
  files_.push_back(path);
  out << contents;
  out.close();
  if (!out) throw Error(ErrorKind::IoFailure, fmt::format("failed writing '{}'", path.string()));
}

}  // namespace pcw
