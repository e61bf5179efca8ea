#include "pcw/config.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "pcw/error.hpp"

namespace pcw {
namespace {

using nlohmann::json;

// Walks one JSON object, recording type/range problems under their paths and
// rejecting keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& node, std::string path, std::vector<SchemaIssue>& issues)
      : node_(node), path_(std::move(path)), issues_(issues) {
    if (!node_.is_object()) fail("", "must be an object");
  }

  ~ObjectReader() {
    if (!node_.is_object()) return;
    for (const auto& [key, value] : node_.items()) {
      if (!seen_.count(key)) issues_.push_back({join(key), "unknown key"});
    }
  }

  ObjectReader(const ObjectReader&) = delete;
  ObjectReader& operator=(const ObjectReader&) = delete;

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.is_object() && node_.contains(key);
  }

  const json& at(const std::string& key) const { return node_.at(key); }
  std::string join(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void fail(const std::string& key, const std::string& message) {
    issues_.push_back({key.empty() ? (path_.empty() ? "(document)" : path_) : join(key), message});
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    if (!at(key).is_number()) return fail(key, "must be a number");
    out = at(key).get<double>();
  }

  void optionalNumber(const std::string& key, std::optional<double>& out) {
    if (!has(key)) return;
    if (!at(key).is_number()) return fail(key, "must be a number");
    out = at(key).get<double>();
  }

  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    if (!at(key).is_number_integer()) return fail(key, "must be an integer");
    out = at(key).get<int>();
  }

  void unsignedInteger(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    if (!at(key).is_number_integer() || at(key).get<long long>() < 0) {
      return fail(key, "must be a non-negative integer");
    }
    out = at(key).get<std::uint64_t>();
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    if (!at(key).is_boolean()) return fail(key, "must be true or false");
    out = at(key).get<bool>();
  }

  void string(const std::string& key, std::string& out) {
    if (!has(key)) return;
    if (!at(key).is_string()) return fail(key, "must be a string");
    out = at(key).get<std::string>();
  }

  void optionalString(const std::string& key, std::optional<std::string>& out) {
    if (!has(key)) return;
    if (!at(key).is_string()) return fail(key, "must be a string");
    out = at(key).get<std::string>();
  }

  template <typename T>
  void list(const std::string& key, std::vector<T>& out) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array()) return fail(key, "must be an array");
    std::vector<T> values;
    for (std::size_t i = 0; i < v.size(); ++i) {
      const bool ok = std::is_same_v<T, std::string>   ? v[i].is_string()
                      : std::is_integral_v<T>          ? v[i].is_number_integer()
                                                       : v[i].is_number();
      if (!ok) return fail(fmt::format("{}[{}]", key, i), "has the wrong type");
      values.push_back(v[i].get<T>());
    }
    out = std::move(values);
  }

  void window(const std::string& key, double& lo, double& hi) {
    if (!has(key)) return;
    const json& v = at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      return fail(key, "must be a [lo, hi] pair of numbers");
    }
    lo = v[0].get<double>();
    hi = v[1].get<double>();
  }

 private:
  const json& node_;
  std::string path_;
  std::vector<SchemaIssue>& issues_;
  std::set<std::string> seen_;
};

template <typename Enum, typename Parse>
void enumeration(ObjectReader& r, const std::string& key, Enum& out, Parse parse) {
  std::string text;
  if (!r.has(key)) return;
  r.string(key, text);
  if (!r.at(key).is_string()) return;
  try {
    out = parse(text);
  } catch (const Error& e) {
    r.fail(key, fmt::format("unsupported value '{}'", text));
  }
}

MatchMode matchModeFromString(std::string_view s) {
  if (s == "degenerate") return MatchMode::Degenerate;
  if (s == "nondegenerate") return MatchMode::Nondegenerate;
  throw Error(ErrorKind::InvalidArgument, "bad match mode");
}

std::string_view to_string(MatchMode m) { return m == MatchMode::Degenerate ? "degenerate" : "nondegenerate"; }

LatticeKind primitiveKind(std::string_view s) {
  const LatticeKind k = latticeKindFromString(s);
  if (k == LatticeKind::Supercell) throw Error(ErrorKind::InvalidArgument, "supercell is derived, not configured");
  return k;
}

void readOverlapMode(const json& node, const std::string& path, OverlapMode& out,
                     std::vector<SchemaIssue>& issues) {
  ObjectReader r(node, path, issues);
  r.integer("band", out.band);
  r.number("k", out.k);
  if (out.band < 0) r.fail("band", "must be non-negative");
}

RunConfig readConfig(const json& doc, std::vector<SchemaIssue>& issues) {
  RunConfig c;
  ObjectReader root(doc, "", issues);
  if (!doc.is_object()) return c;

  auto& s = c.structure;
  if (!root.has("lattice")) root.fail("lattice", "is required");
  enumeration(root, "lattice", s.lattice, primitiveKind);
  if (!root.has("hole_radius")) root.fail("hole_radius", "is required");
  root.number("hole_radius", s.holeRadius);
  if (!root.has("eps_background")) root.fail("eps_background", "is required");
  root.number("eps_background", s.epsBackground);
  root.number("eps_hole", s.epsHole);
  if (root.has("defect")) {
    DefectSpec d;
    ObjectReader r(root.at("defect"), "defect", issues);
    r.integer("missing_rows", d.missingRows);
    r.number("width_scale", d.widthScale);
    if (d.missingRows < 0) r.fail("missing_rows", "must be non-negative");
    if (!(d.widthScale > 0.0)) r.fail("width_scale", "must be positive");
    s.defect = d;
  }
  root.integer("supercell_rows", s.supercellRows);
  root.integer("resolution", s.resolution);
  root.optionalNumber("lattice_constant_nm", c.latticeConstantNm);
  if (root.has("threads")) {
    int t = 0;
    root.integer("threads", t);
    if (t < 1) root.fail("threads", "must be at least 1");
    c.threads = t;
  }

  if (root.has("solver")) {
    auto& v = c.solver;
    ObjectReader r(root.at("solver"), "solver", issues);
    r.number("cutoff", v.cutoff);
    r.integer("num_bands", v.numBands);
    enumeration(r, "polarization", v.polarization, polarizationFromString);
    enumeration(r, "rule", v.rule, fourierRuleFromString);
    if (r.has("k_path")) {
      KPathConfig kp;
      ObjectReader p(r.at("k_path"), "solver.k_path", issues);
      p.list("vertices", kp.vertices);
      p.integer("segment_points", kp.segmentPoints);
      if (kp.vertices.empty()) p.fail("vertices", "needs at least one symmetry point");
      for (const auto& name : kp.vertices) {
        try {
          symmetryPoint(s.lattice, name);
        } catch (const Error&) {
          p.fail("vertices", fmt::format("unknown symmetry point '{}'", name));
        }
      }
      if (kp.segmentPoints < 1) p.fail("segment_points", "must be at least 1");
      v.kPath = kp;
    }
    if (r.has("kx_grid")) {
      ObjectReader g(r.at("kx_grid"), "solver.kx_grid", issues);
      g.integer("count", v.kxGrid.count);
      g.number("max", v.kxGrid.max);
      if (v.kxGrid.count < 3) g.fail("count", "must be at least 3");
      if (!(v.kxGrid.max > 0.0 && v.kxGrid.max <= 0.5)) g.fail("max", "must lie in (0, 0.5]");
    }
    if (!(v.cutoff > 0.0)) r.fail("cutoff", "must be positive");
    if (v.numBands < 1) r.fail("num_bands", "must be at least 1");
  }

  if (root.has("dual_eps")) {
    DualEpsConfig d;
    ObjectReader r(root.at("dual_eps"), "dual_eps", issues);
    r.number("eps_low", d.epsLow);
    r.number("eps_high", d.epsHigh);
    r.window("low_window", d.lowWindowLo, d.lowWindowHi);
    r.window("high_window", d.highWindowLo, d.highWindowHi);
    if (d.epsLow < 1.0) r.fail("eps_low", "must be at least 1");
    if (d.epsHigh < 1.0) r.fail("eps_high", "must be at least 1");
    if (!(d.lowWindowLo < d.lowWindowHi)) r.fail("low_window", "needs lo < hi");
    if (!(d.highWindowLo < d.highWindowHi)) r.fail("high_window", "needs lo < hi");
    if (d.highWindowLo < d.lowWindowHi) r.fail("high_window", "overlaps the low window");
    c.dualEps = d;
  }

  if (root.has("match")) {
    auto& m = c.match;
    ObjectReader r(root.at("match"), "match", issues);
    r.number("energy_tol", m.energyTol);
    r.number("momentum_tol", m.momentumTol);
    r.integer("m_min", m.mMin);
    r.integer("m_max", m.mMax);
    enumeration(r, "mode", m.mode, matchModeFromString);
    r.list("pump_bands", m.pumpBands);
    r.list("dc_bands", m.dcBands);
    r.unsignedInteger("max_evaluations", m.maxEvaluations);
    r.boolean("refine", m.refine);
    r.optionalString("low_bands_file", m.lowBandsFile);
    r.optionalString("high_bands_file", m.highBandsFile);
    if (!(m.energyTol > 0.0)) r.fail("energy_tol", "must be positive");
    if (!(m.momentumTol > 0.0)) r.fail("momentum_tol", "must be positive");
    if (m.mMin > m.mMax) r.fail("m_max", "must not be below m_min");
    for (int b : m.pumpBands) if (b < 0) r.fail("pump_bands", "band indices must be non-negative");
    for (int b : m.dcBands) if (b < 0) r.fail("dc_bands", "band indices must be non-negative");
    if (m.lowBandsFile.has_value() != m.highBandsFile.has_value()) {
      r.fail("low_bands_file", "low_bands_file and high_bands_file go together");
    }
  }

  if (root.has("gapmap")) {
    auto& g = c.gapmap;
    ObjectReader r(root.at("gapmap"), "gapmap", issues);
    r.list("radii", g.radii);
    r.integer("zone_density", g.zoneDensity);
    r.boolean("check_sampling", g.checkSampling);
    if (g.radii.empty()) r.fail("radii", "needs at least one radius");
    for (double radius : g.radii) {
      if (radius < 0.0 || radius >= packingLimit(s.lattice)) {
        r.fail("radii", fmt::format("radius {} exceeds packing limit {:.6g}", radius, packingLimit(s.lattice)));
      }
    }
    if (g.zoneDensity < 1) r.fail("zone_density", "must be at least 1");
  }

  if (root.has("project")) {
    auto& p = c.project;
    ObjectReader r(root.at("project"), "project", issues);
    r.integer("transverse_samples", p.transverseSamples);
    r.number("light_line_index", p.lightLineIndex);
    if (p.transverseSamples < 8) r.fail("transverse_samples", "must be at least 8");
    if (!(p.lightLineIndex > 0.0)) r.fail("light_line_index", "must be positive");
  }

  if (root.has("overlap")) {
    auto& o = c.overlap;
    ObjectReader r(root.at("overlap"), "overlap", issues);
    r.number("scalar_weight", o.scalarWeight);
    r.integer("limit", o.limit);
    if (o.limit < 0) r.fail("limit", "must be non-negative");
    if (r.has("triples")) {
      const json& t = r.at("triples");
      if (!t.is_array()) {
        r.fail("triples", "must be an array");
      } else {
        for (std::size_t i = 0; i < t.size(); ++i) {
          const std::string base = fmt::format("overlap.triples[{}]", i);
          OverlapTriple triple;
          ObjectReader tr(t[i], base, issues);
          for (auto [key, mode] : {std::pair{"pump", &triple.pump}, std::pair{"signal", &triple.signal},
                                   std::pair{"idler", &triple.idler}}) {
            if (tr.has(key)) {
              readOverlapMode(tr.at(key), base + "." + key, *mode, issues);
            } else {
              tr.fail(key, "is required");
            }
          }
          o.triples.push_back(triple);
        }
      }
    }
  }

  if (root.has("output")) {
    auto& o = c.output;
    ObjectReader r(root.at("output"), "output", issues);
    r.string("directory", o.directory);
    r.list("formats", o.formats);
    if (o.directory.empty()) r.fail("directory", "must not be empty");
    if (o.formats.empty()) r.fail("formats", "needs at least one of csv, json");
    for (const auto& f : o.formats) {
      if (f != "csv" && f != "json") r.fail("formats", fmt::format("unsupported format '{}'", f));
    }
  }

  // Physical ranges of the structure.
  if (s.holeRadius < 0.0) root.fail("hole_radius", "must be non-negative");
  if (s.holeRadius >= packingLimit(s.lattice)) {
    root.fail("hole_radius", fmt::format("{} exceeds packing limit {:.6g} for the {} lattice", s.holeRadius,
                                         packingLimit(s.lattice), to_string(s.lattice)));
  }
  if (s.epsBackground < 1.0) root.fail("eps_background", "must be at least 1");
  if (s.epsHole < 1.0) root.fail("eps_hole", "must be at least 1");
  if (s.supercellRows < 1) root.fail("supercell_rows", "must be at least 1");
  if (s.defect && s.defect->missingRows >= 1 && s.supercellRows < s.defect->missingRows + 4) {
    root.fail("supercell_rows", fmt::format("cladding-too-thin: {} rows cannot hold {} missing rows plus 4 cladding rows",
                                            s.supercellRows, s.defect->missingRows));
  }
  if (s.resolution < 16) root.fail("resolution", "must be at least 16 pixels per period");
  return c;
}

json optionalToJson(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

}  // namespace

bool OutputConfig::wants(std::string_view format) const {
  return std::find(formats.begin(), formats.end(), format) != formats.end();
}

std::vector<SchemaIssue> validateConfig(std::string_view document) {
  std::vector<SchemaIssue> issues;
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    issues.push_back({"(document)", fmt::format("malformed JSON: {}", e.what())});
    return issues;
  }
  readConfig(doc, issues);
  return issues;
}

RunConfig parseConfig(std::string_view document) {
  std::vector<SchemaIssue> issues;
  json doc;
  try {
    doc = json::parse(document);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaViolation, fmt::format("(document): malformed JSON: {}", e.what()));
  }
  RunConfig c = readConfig(doc, issues);
  if (!issues.empty()) {
    std::string message;
    for (const auto& i : issues) message += fmt::format("{}{}: {}", message.empty() ? "" : "; ", i.path, i.message);
    throw Error(ErrorKind::SchemaViolation, message);
  }
  return c;
}

RunConfig loadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoFailure, fmt::format("cannot read config '{}'", path));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parseConfig(buffer.str());
}

std::string emitConfig(const RunConfig& c) {
  const auto& s = c.structure;
  json doc;
  doc["lattice"] = to_string(s.lattice);
  doc["hole_radius"] = s.holeRadius;
  doc["eps_background"] = s.epsBackground;
  doc["eps_hole"] = s.epsHole;
  if (s.defect) doc["defect"] = {{"missing_rows", s.defect->missingRows}, {"width_scale", s.defect->widthScale}};
  doc["supercell_rows"] = s.supercellRows;
  doc["resolution"] = s.resolution;
  if (c.latticeConstantNm) doc["lattice_constant_nm"] = *c.latticeConstantNm;
  if (c.threads) doc["threads"] = *c.threads;

  json solver = {{"cutoff", c.solver.cutoff},
                 {"num_bands", c.solver.numBands},
                 {"polarization", to_string(c.solver.polarization)},
                 {"rule", to_string(c.solver.rule)},
                 {"kx_grid", {{"count", c.solver.kxGrid.count}, {"max", c.solver.kxGrid.max}}}};
  if (c.solver.kPath) {
    solver["k_path"] = {{"vertices", c.solver.kPath->vertices}, {"segment_points", c.solver.kPath->segmentPoints}};
  }
  doc["solver"] = solver;

  if (c.dualEps) {
    const auto& d = *c.dualEps;
    doc["dual_eps"] = {{"eps_low", d.epsLow},
                       {"eps_high", d.epsHigh},
                       {"low_window", {d.lowWindowLo, d.lowWindowHi}},
                       {"high_window", {d.highWindowLo, d.highWindowHi}}};
  }

  const auto& m = c.match;
  json match = {{"energy_tol", m.energyTol},     {"momentum_tol", m.momentumTol},
                {"m_min", m.mMin},               {"m_max", m.mMax},
                {"mode", to_string(m.mode)},     {"pump_bands", m.pumpBands},
                {"dc_bands", m.dcBands},         {"max_evaluations", m.maxEvaluations},
                {"refine", m.refine}};
  if (m.lowBandsFile) match["low_bands_file"] = optionalToJson(m.lowBandsFile);
  if (m.highBandsFile) match["high_bands_file"] = optionalToJson(m.highBandsFile);
  doc["match"] = match;

  doc["gapmap"] = {{"radii", c.gapmap.radii},
                   {"zone_density", c.gapmap.zoneDensity},
                   {"check_sampling", c.gapmap.checkSampling}};
  doc["project"] = {{"transverse_samples", c.project.transverseSamples},
                    {"light_line_index", c.project.lightLineIndex}};

  json triples = json::array();
  for (const auto& t : c.overlap.triples) {
    const auto mode = [](const OverlapMode& x) { return json{{"band", x.band}, {"k", x.k}}; };
    triples.push_back({{"pump", mode(t.pump)}, {"signal", mode(t.signal)}, {"idler", mode(t.idler)}});
  }
  doc["overlap"] = {{"scalar_weight", c.overlap.scalarWeight}, {"limit", c.overlap.limit}, {"triples", triples}};
  doc["output"] = {{"directory", c.output.directory}, {"formats", c.output.formats}};
  return doc.dump(2);
}

std::string configHash(const RunConfig& config) { return hashString(fnv1a(emitConfig(config))); }

StructureSpec structureFrom(const RunConfig& config, std::optional<double> epsBackground) {
  const auto& s = config.structure;
  StructureSpec out = perfectCrystal(s.lattice, s.holeRadius, epsBackground.value_or(s.epsBackground), s.epsHole);
  out.defect = s.defect;
  out.supercellRows = s.supercellRows;
  validate(out);
  return out;
}

SolverOptions solverOptionsFrom(const RunConfig& config) {
  SolverOptions o;
  o.cutoff = config.solver.cutoff;
  o.resolution = config.structure.resolution;
  o.rule = config.solver.rule;
  return o;
}

std::vector<Vec2> kPathFrom(const RunConfig& config) {
  const LatticeKind kind = config.structure.lattice;
  KPathConfig path;
  if (config.solver.kPath) {
    path = *config.solver.kPath;
  } else {
    path.vertices = kind == LatticeKind::Hexagonal ? std::vector<std::string>{"Gamma", "M", "K", "Gamma"}
                                                   : std::vector<std::string>{"Gamma", "X", "M", "Gamma"};
  }
  std::vector<Vec2> vertices;
  for (const auto& name : path.vertices) vertices.push_back(symmetryPoint(kind, name));
  return interpolatePath(vertices, path.segmentPoints);
}

std::vector<double> kxGridFrom(const RunConfig& config) {
  std::vector<double> out;
  for (const Vec2& k : kxLine(config.solver.kxGrid.count, config.solver.kxGrid.max)) out.push_back(k.x);
  return out;
}

}  // namespace pcw
