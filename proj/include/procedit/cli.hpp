#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "procedit/edit_engine.hpp"
#include "procedit/gateway.hpp"
#include "procedit/topology.hpp"

namespace procedit::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInvalidInput = 2, kEndpointFailure = 3 };

enum class Mode { live, record, replay, mock };

std::string_view to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view name);

struct CliConfig {
  std::string endpoint = "https://api.openai.com/v1";
  std::string credential_env = "OPENAI_API_KEY";
  std::string model;
  Topology topology = Topology::sequential;
  std::optional<std::filesystem::path> templates;
  std::optional<std::filesystem::path> cache;
  std::optional<std::filesystem::path> mock_fixtures;
  Mode mode = Mode::live;
  int parallelism = 1;
  std::size_t max_in_flight = 4;
  MergePolicy merge_policy = MergePolicy::customize_wins;
  bool verify_sees_hint = false;
};

/// Raw string settings from one source, keyed by config name ("endpoint",
/// "model", "mode", ...).
using ConfigLayer = std::map<std::string, std::string>;

/// Names accepted in config files, PROCEDIT_<NAME> environment variables and
/// the matching --<name> flags (underscores become dashes).
const std::vector<std::string>& config_keys();

/// Merges layers with precedence flags > environment > file > defaults and
/// validates the result. Throws InputError for unknown keys or bad values.
CliConfig resolve_config(const ConfigLayer& flags, const ConfigLayer& environment, const ConfigLayer& file);

/// Reads a JSON object of config keys.
ConfigLayer load_config_file(const std::filesystem::path& path);

std::string format_config(const CliConfig& config);

using TransportFactory = std::function<std::shared_ptr<Transport>(const std::string& base_url)>;
using EnvLookup = std::function<std::optional<std::string>(const std::string& name)>;

/// Process surroundings, injectable for tests.
struct CliIo {
  std::istream& in;
  std::ostream& out;
  std::ostream& err;
  EnvLookup env;
  TransportFactory transport_factory;
};

/// Reads the real environment and uses the HTTP transport.
CliIo default_io();

/// Runs one invocation; argv[0] is the program name. Returns an ExitCode.
int dispatch(const std::vector<std::string>& argv, CliIo& io);

} // namespace procedit::cli
