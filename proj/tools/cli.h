#ifndef SONICGUIDE_TOOLS_CLI_H_
#define SONICGUIDE_TOOLS_CLI_H_

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "sonicguide/mapping.h"
#include "sonicguide/synth.h"

namespace sonicguide::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

// Settings shared by all subcommands. Defaults, then a `key = value` config
// file, then command flags.
struct AppConfig {
  SynthConfig synth;
  MappingConfig mapping;
  Mode mode = Mode::k3D;
  std::string addr;  // empty: SONIC_GUIDE_ADDR or the built-in default
  double dwell_time = 0.5;
  double trial_timeout = 120.0;
  double start_distance = 0.8;
  std::optional<std::filesystem::path> log_dir;
};

// Sets one key; throws ValidationError for unknown keys or bad values.
void apply_setting(AppConfig& cfg, std::string_view key, std::string_view value);

// `key = value` lines; blank lines and '#' comments are skipped. Throws
// ParseError with the 1-based line number.
void apply_config_text(AppConfig& cfg, std::string_view text);
void apply_config_file(AppConfig& cfg, const std::filesystem::path& path);

struct ConfigKey {
  std::string name;
  std::string default_value;
  std::string help;
};
std::vector<ConfigKey> config_keys();

// Entry point behind the `sonicguide` executable. Returns the exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sonicguide::cli

#endif  // SONICGUIDE_TOOLS_CLI_H_
