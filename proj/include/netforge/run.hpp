#pragma once

#include <netforge/corpus.hpp>
#include <netforge/env.hpp>
#include <netforge/error.hpp>
#include <netforge/ppo.hpp>

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace netforge
{

/// Settings of a `train` run, read from an INI file.
struct RunConfig
{
  std::filesystem::path output = "run";
  std::uint64_t seed = 0;
  /// Write every transition to trace.csv.
  bool trace = false;

  /// Per context: "desk" for the built-in pool, or circuit files and directories.
  std::array<std::vector<std::string>, num_contexts> corpus;

  /// "builtin" or "external".
  std::string oracle = "builtin";
  std::vector<std::string> oracle_command;
  double oracle_timeout = 120.0;
  double tau = default_tau;
  unsigned wl_depth = 2;
  /// "desk", "none" or a model JSON file.
  std::string trojan_model = "desk";
  std::string re_model = "desk";
  std::string key_model = "desk";

  EnvOptions env;
  TrainConfig train;
};

/// Parses and validates the INI text. Every problem is collected and reported
/// in one UsageError; relative paths resolve against `base`.
RunConfig parse_run_config( std::string const& text, std::filesystem::path const& base = {} );
RunConfig load_run_config( std::filesystem::path const& path );

/// Ground-truth sidecars. Labels are keyed by the output net of each cell.
nlohmann::json truth_sidecar( Context context, Netlist const& netlist, NodeLabels const& truth );
nlohmann::json key_sidecar( std::vector<std::string> const& key_inputs, std::vector<bool> const& key );
std::filesystem::path truth_sidecar_path( std::filesystem::path const& circuit );
std::filesystem::path key_sidecar_path( std::filesystem::path const& circuit );

/// Reads a circuit and, for trojan/RE/obfuscation, its sidecar. Throws
/// UsageError naming the path when a file is missing or malformed.
PoolEntry load_pool_entry( std::filesystem::path const& circuit, Context context );
/// Writes `<dir>/<name>.blif` plus the sidecar the context needs.
void save_pool_entry( std::filesystem::path const& dir, PoolEntry const& entry, Context context );

/// Expands directories to their .blif/.v files in name order. "desk" entries
/// take the built-in pool.
Pools load_pools( RunConfig const& config );

/// "desk" loads the built-in model, "none" leaves it empty, anything else is a file.
std::optional<NodeModel> load_model( std::string const& spec, Context context );
SurrogateModels load_models( double tau, unsigned wl_depth, std::string const& trojan, std::string const& re,
                             std::string const& key );

std::shared_ptr<OracleBackend> make_oracle( RunConfig const& config );

/// Splits a command line on whitespace, honouring single and double quotes.
std::vector<std::string> split_command( std::string const& line );

/// Seed from `--seed`, then NETFORGE_SEED, then `fallback`. Throws UsageError
/// on a malformed variable.
std::uint64_t resolve_seed( std::optional<std::uint64_t> flag, std::uint64_t fallback );

/// Independent stream seed for (seed, a, b).
std::uint64_t derive_seed( std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0 );

/// {"tool", "command", "args", "seed", ...extra} written to `<dir>/manifest.json`.
void write_manifest( std::filesystem::path const& dir, std::string const& command,
                     std::vector<std::string> const& args, std::uint64_t seed,
                     nlohmann::json const& extra = nlohmann::json::object() );

} // namespace netforge
