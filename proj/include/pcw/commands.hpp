#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "pcw/config.hpp"

namespace pcw {

struct CommandOptions {
  /// Directory of the config file; relative band-file paths resolve against it.
  std::filesystem::path configDirectory = ".";
  /// Overrides output.directory.
  std::optional<std::filesystem::path> outDirectory;
  /// Overrides match.mode.
  std::optional<MatchMode> matchMode;
  /// Appends overlap integrals to match results.
  bool overlap = false;
};

const std::vector<std::string>& commandNames();

/// Runs one pipeline stage and returns the files it wrote. On any error the
/// files written so far are removed and the error propagates with the
/// command name attached.
std::vector<std::filesystem::path> runCommand(std::string_view name, const RunConfig& config,
                                              const CommandOptions& options, std::ostream& log);

}  // namespace pcw
