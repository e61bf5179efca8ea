#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pcw/commands.hpp"
#include "pcw/config.hpp"
#include "pcw/error.hpp"
#include "pcw/output.hpp"

using namespace pcw;
namespace fs = std::filesystem;

namespace {

const char* kMinimal = R"({"lattice": "hexagonal", "hole_radius": 0.3, "eps_background": 13})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("pcw_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::vector<std::string> messages(std::string_view doc) {
  std::vector<std::string> out;
  for (const auto& i : validateConfig(doc)) out.push_back(i.path + ": " + i.message);
  return out;
}

bool mentions(const std::vector<std::string>& all, const std::string& needle) {
  for (const auto& m : all) {
    if (m.find(needle) != std::string::npos) return true;
  }
  return false;
}

RunConfig smallGapmap(const fs::path& out) {
  RunConfig c = parseConfig(kMinimal);
  c.structure.resolution = 32;
  c.solver.cutoff = 4.0;
  c.solver.numBands = 4;
  c.gapmap.radii = {0.3, 0.4};
  c.gapmap.zoneDensity = 3;
  c.output.directory = out.string();
  return c;
}

BandStructure sample() {
  BandStructure b;
  b.lattice = buildLattice(LatticeKind::Hexagonal);
  b.kPath = kxLine(3);
  b.frequencies.resize(3, 2);
  b.frequencies << 0.0, 0.15, 0.1, 0.30, 0.123456789012345, 0.3;
  b.provenance.structureHash = "s";
  b.provenance.geometryHash = "g";
  b.provenance.cutoff = 8.0;
  b.provenance.resolution = {64, 64};
  b.provenance.epsBackground = 13.0;
  return b;
}

}  // namespace

TEST_CASE("minimal config fills defaults") {
  const RunConfig c = parseConfig(kMinimal);
  RunConfig expected;
  expected.structure.lattice = LatticeKind::Hexagonal;
  expected.structure.holeRadius = 0.3;
  expected.structure.epsBackground = 13.0;
  CHECK(c == expected);
  CHECK(c.solver.cutoff == kDefaultCutoff);
  CHECK(c.solver.rule == FourierRule::InverseEpsMatrix);
  CHECK(c.output.wants("csv"));
  CHECK(c.output.wants("json"));
  const auto path = kPathFrom(c);
  CHECK(path.front() == Vec2{0.0, 0.0});
  CHECK(path.back() == Vec2{0.0, 0.0});
  CHECK(kxGridFrom(c).size() == 51);
}

TEST_CASE("fixture config") {
  const RunConfig c = loadConfig(PCW_TEST_DATA "/waveguide_fixture.json");
  REQUIRE(c.dualEps);
  CHECK(c.dualEps->epsLow == 10.8);
  CHECK(c.dualEps->highWindowLo == 0.25);
  CHECK(*c.latticeConstantNm == 232.5);
  CHECK(c.structure.defect->missingRows == 1);
  CHECK(c.output.formats == std::vector<std::string>{"csv"});
  CHECK(structureFrom(c, 10.8).epsBackground == 10.8);
}

TEST_CASE("schema violations") {
  CHECK(mentions(messages(R"({"lattice": "hexagonal", "hole_radius": 0.7, "eps_background": 13})"),
                 "exceeds packing limit"));
  try {
    parseConfig(R"({"lattice": "square", "hole_radius": 0.5, "eps_background": 13})");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SchemaViolation);
    CHECK(std::string(e.what()).find("hole_radius") != std::string::npos);
  }
  const auto unknown = messages(R"({"lattice": "hexagonal", "hole_radius": 0.3, "eps_background": 13,
                                    "solver": {"cutof": 8}})");
  CHECK(mentions(unknown, "solver.cutof: unknown key"));
  const auto many = messages(R"({"lattice": "triangle", "eps_background": 0.5,
                                 "solver": {"polarization": "transverse"}, "output": {"formats": ["xml"]}})");
  CHECK(mentions(many, "lattice"));
  CHECK(mentions(many, "hole_radius: is required"));
  CHECK(mentions(many, "eps_background"));
  CHECK(mentions(many, "solver.polarization"));
  CHECK(mentions(many, "unsupported format"));
  CHECK(mentions(messages(R"({"lattice": "hexagonal", "hole_radius": 0.3, "eps_background": 13,
                              "defect": {"missing_rows": 1}, "supercell_rows": 4})"),
                 "cladding-too-thin"));
  CHECK(mentions(messages("{not json"), "malformed JSON"));
  CHECK(validateConfig(kMinimal).empty());
}

TEST_CASE("config round trip") {
  RunConfig c = loadConfig(PCW_TEST_DATA "/waveguide_fixture.json");
  CHECK(parseConfig(emitConfig(c)) == c);
  c.threads = 2;
  c.solver.kPath = KPathConfig{{"Gamma", "K", "M"}, 7};
  c.solver.rule = FourierRule::DirectEta;
  c.solver.polarization = Polarization::Odd;
  c.match.pumpBands = {3, 4};
  c.match.dcBands = {0};
  c.match.mode = MatchMode::Nondegenerate;
  c.match.refine = false;
  c.match.energyTol = 3.3e-4;
  c.gapmap.radii = {0.2, 0.31};
  c.gapmap.checkSampling = true;
  c.project.lightLineIndex = 1.45;
  c.overlap.triples = {{{3, 0.44}, {1, 0.22}, {1, 0.22}}};
  c.overlap.scalarWeight = 0.7;
  const auto text = emitConfig(c);
  const RunConfig back = parseConfig(text);
  CHECK(back == c);
  CHECK(emitConfig(back) == text);
  CHECK(configHash(back) == configHash(c));
  RunConfig other = c;
  other.structure.holeRadius = 0.37;
  CHECK(configHash(other) != configHash(c));
}

TEST_CASE("number formatting") {
  CHECK(formatNumber(0.0) == "0");
  CHECK(formatNumber(232.5 / 0.30) == "775");
  CHECK(formatNumber(232.5 / 0.15) == "1550");
  CHECK(formatNumber(0.123456789012345) == "0.123456789012");
  CHECK(roundTo12(0.123456789012345) == 0.123456789012);
}

TEST_CASE("band files") {
  const auto b = sample();
  const auto prov = bandProvenance(b);
  const auto csv = bandsCsv(b, prov, 232.5);
  CHECK(csv.rfind("# ", 0) == 0);
  CHECK(csv.find("k_index,kx,ky,band,omega,wavelength_nm\n") != std::string::npos);
  CHECK(csv.find("\n0,0,0,0,0,\n") != std::string::npos);
  CHECK(csv.find("\n0,0,0,1,0.15,1550\n") != std::string::npos);
  CHECK(csv.find("\n1,0.25,0,1,0.3,775\n") != std::string::npos);
  CHECK(bandsCsv(b, prov, std::nullopt).find("wavelength_nm") == std::string::npos);

  const auto back = readBandsCsv(csv);
  CHECK(back.provenance.geometryHash == "g");
  CHECK(back.provenance.cutoff == 8.0);
  REQUIRE(back.numK() == 3);
  REQUIRE(back.numBands() == 2);
  const auto doc = nlohmann::json::parse(bandsJson(b, prov, 232.5));
  CHECK(doc["provenance"]["geometry_hash"] == "g");
  CHECK(doc["wavelength_nm"][0][0].is_null());
  for (int i = 0; i < 3; ++i) {
    for (int n = 0; n < 2; ++n) {
      CHECK(back.frequencies(i, n) == roundTo12(b.frequencies(i, n)));
      CHECK(doc["omega"][i][n].get<double>() == back.frequencies(i, n));
    }
    CHECK(back.kPath[i] == b.kPath[i]);
  }
  CHECK_THROWS_AS(readBandsCsv("k_index,kx\n"), Error);
}

TEST_CASE("match output carries every solution field") {
  MatchSolution s;
  s.pump = {2, 0.44, 0.3, 0.2};
  s.signal = {1, 0.22, 0.15, 0.25};
  s.idler = s.signal;
  s.degenerate = true;
  s.dgdPerLength = 1.0;
  const auto csv = matchesCsv({s}, {}, 232.5);
  CHECK(csv.find("775") != std::string::npos);
  CHECK(csv.find("1550") != std::string::npos);
  const auto doc = nlohmann::json::parse(matchesJson({s}, {}, 232.5));
  CHECK(doc["solutions"].size() == 1);
}

TEST_CASE("unfinished output sessions clean up") {
  const auto dir = scratch("session");
  {
    OutputSession session(dir);
    session.write("a.csv", "x\n");
    CHECK(fs::exists(dir / "a.csv"));
  }
  CHECK_FALSE(fs::exists(dir / "a.csv"));
  {
    OutputSession session(dir);
    session.write("b.csv", "y\n");
    session.commit();
  }
  CHECK(slurp(dir / "b.csv") == "y\n");
}

TEST_CASE("commands are deterministic") {
  const auto dir = scratch("gapmap");
  std::ostringstream log;
  const auto c = smallGapmap(dir);
  const auto first = runCommand("gapmap", c, {}, log);
  REQUIRE_FALSE(first.empty());
  std::vector<std::string> before;
  for (const auto& f : first) before.push_back(slurp(f));
  const auto second = runCommand("gapmap", c, {}, log);
  REQUIRE(second == first);
  for (std::size_t i = 0; i < first.size(); ++i) {
    if (first[i].filename().string().find("provenance") != std::string::npos) continue;
    CHECK(slurp(second[i]) == before[i]);
  }
  const auto gap = slurp(dir / "gapmap.csv");
  CHECK(gap.find("radius") != std::string::npos);
}

TEST_CASE("failed commands leave no partial output") {
  const auto dir = scratch("failed");
  RunConfig c = loadConfig(PCW_TEST_DATA "/waveguide_fixture.json");
  c.output.directory = dir.string();
  c.match.lowBandsFile = "does_not_exist.csv";
  std::ostringstream log;
  CommandOptions options;
  options.configDirectory = PCW_TEST_DATA;
  try {
    runCommand("match", c, options, log);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("match") != std::string::npos);
  }
  CHECK(fs::is_empty(dir));
  CHECK_THROWS_AS(runCommand("nope", c, options, log), Error);
}
