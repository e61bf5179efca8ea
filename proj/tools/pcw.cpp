#include <CLI11.hpp>
#include <fmt/format.h>

#include <iostream>
#include <map>

#include "pcw/commands.hpp"
#include "pcw/error.hpp"
#include "pcw/output.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Plane-wave photonic crystal bands, waveguide projection and phase matching"};
  app.set_version_flag("--version", std::string(pcw::kToolVersion));
  app.require_subcommand(1);

  std::string configPath;
  std::string outDir;
  bool degenerate = false;
  bool nondegenerate = false;
  bool overlap = false;

  const std::map<std::string, std::string> descriptions{
      {"bands", "band structure of the perfect crystal along a k-path"},
      {"gapmap", "band gaps of the perfect crystal against hole radius"},
      {"project", "crystal bands projected onto the guide axis, with light cone"},
      {"defect-bands", "waveguide supercell bands and mode classification"},
      {"match", "phase-matching solutions on the stitched dual-eps dispersion"},
      {"overlap", "nonlinear overlap integrals for configured mode triples"}};

  for (const auto& name : pcw::commandNames()) {
    CLI::App* sub = app.add_subcommand(name, descriptions.at(name));
    sub->add_option("--config", configPath, "JSON run configuration")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", outDir, "output directory (overrides output.directory)");
    if (name == "match") {
      auto* d = sub->add_flag("--degenerate", degenerate, "degenerate scan (signal = idler)");
      auto* n = sub->add_flag("--nondegenerate", nondegenerate, "full signal x idler grid scan");
      d->excludes(n);
      sub->add_flag("--overlap", overlap, "append overlap integrals to each solution");
    }
  }
  CLI11_PARSE(app, argc, argv);

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    const pcw::RunConfig config = pcw::loadConfig(configPath);
    pcw::CommandOptions options;
    options.configDirectory = std::filesystem::path(configPath).parent_path();
    if (options.configDirectory.empty()) options.configDirectory = ".";
    if (!outDir.empty()) options.outDirectory = outDir;
    if (degenerate) options.matchMode = pcw::MatchMode::Degenerate;
    if (nondegenerate) options.matchMode = pcw::MatchMode::Nondegenerate;
    options.overlap = overlap;
    const auto files = pcw::runCommand(command, config, options, std::cerr);
    for (const auto& f : files) std::cout << f.string() << "\n";
  } catch (const pcw::Error& e) {
    std::cerr << fmt::format("pcw {}: {}\n", command, e.what());
    return e.kind() == pcw::ErrorKind::SchemaViolation ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << fmt::format("pcw {}: unexpected failure: {}\n", command, e.what());
    return 1;
  }
  return 0;
}
