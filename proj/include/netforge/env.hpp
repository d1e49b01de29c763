#pragma once

#include <netforge/adapter.hpp>
#include <netforge/corpus.hpp>
#include <netforge/features.hpp>
#include <netforge/techmap.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace netforge
{

/// Episode length per context: 5 for piracy and obfuscation, 1 otherwise.
unsigned default_horizon( Context context );

/// Context-selected reward for a final oracle value:
///   piracy       alpha if value < 0, else 0
///   trojan / RE  1 - value
///   obfuscation  exp(-5 |0.5 - value|)
double terminal_reward( Context context, double value, double alpha = 1.0 );

/// Piracy: value < 0. Trojan: value < 0.5. RE: value <= 0.25.
/// Obfuscation: 0.5 <= value <= 0.55.
bool is_success( Context context, double value );

/// Ground truth a request needs for `candidate`, which must descend from `origin`.
OracleRequest make_request( Context context, Netlist const& candidate, PoolEntry const& origin );

class OracleBackend
{
public:
  virtual ~OracleBackend() = default;
  virtual OracleScore score( Context context, Netlist const& candidate, PoolEntry const& origin ) = 0;
};

/// In-process surrogates.
class BuiltinOracle final : public OracleBackend
{
public:
  explicit BuiltinOracle( SurrogateModels models ) : models_( std::move( models ) ) {}
  OracleScore score( Context context, Netlist const& candidate, PoolEntry const& origin ) override;
  SurrogateModels const& models() const noexcept { return models_; }

private:
  SurrogateModels models_;
};

/// Classifier behind the line protocol. Queries from several environments
/// are serialized.
class ExternalOracle final : public OracleBackend
{
public:
  explicit ExternalOracle( std::vector<std::string> argv,
                           std::chrono::milliseconds timeout = std::chrono::seconds( 120 ) )
      : process_( std::move( argv ), timeout )
  {
  }
  OracleScore score( Context context, Netlist const& candidate, PoolEntry const& origin ) override;

private:
  std::mutex mutex_;
  AdapterProcess process_;
};

struct EnvOptions
{
  double alpha = 1.0;
  double gamma = 0.99;
  /// Reward every step instead of only at the end.
  bool dense = false;
  /// Check every transition against the episode's initial circuit.
  bool verify_equivalence = true;
  /// Per-context episode length; defaults to default_horizon.
  std::array<unsigned, num_contexts> horizon = { 5, 1, 1, 5 };
};

struct Transition
{
  Context context = Context::Piracy;
  std::string circuit;
  unsigned step = 0;
  Observation observation{};
  ActionId action = ActionId::Noop;
  double reward = 0.0;
  Observation next_observation{};
  bool done = false;
  FeatureVector features{};
  std::optional<double> oracle_value;
  bool success = false;
  /// Final circuit of a successful episode.
  std::optional<Netlist> adversarial;
};

/// One episodic environment over per-context pools. Single actor: reset and
/// step must not be called concurrently.
class CircuitEnv
{
public:
  /// Throws Error when every pool is empty or an option is out of range.
  CircuitEnv( Pools pools, std::shared_ptr<OracleBackend> oracle, EnvOptions options = {}, std::uint64_t seed = 0 );

  /// Random context (uniform over non-empty pools) unless one is given; the
  /// circuit is drawn uniformly from that pool. Throws Error on an empty pool.
  Observation reset( std::optional<Context> context = std::nullopt );
  /// Starts from a specific pool entry.
  Observation reset( Context context, std::size_t index );
  /// Throws Error without an active episode.
  Transition step( ActionId action );

  /// Throws Error while an episode is running.
  void set_dense( bool dense );
  bool dense() const noexcept { return options_.dense; }

  bool active() const noexcept { return active_; }
  Context context() const noexcept { return context_; }
  PoolEntry const& origin() const;
  Netlist const& circuit() const noexcept { return current_; }
  unsigned step_index() const noexcept { return t_; }
  unsigned horizon() const noexcept { return options_.horizon[index_of( context_ )]; }
  EnvOptions const& options() const noexcept { return options_; }
  Pools const& pools() const noexcept { return pools_; }
  std::vector<Context> const& contexts() const noexcept { return enabled_; }

  /// Observation of the current circuit.
  Observation observation() const;

  std::uint64_t oracle_calls() const noexcept { return oracle_calls_; }
  std::uint64_t episodes() const noexcept { return episodes_; }

private:
  Pools pools_;
  std::shared_ptr<OracleBackend> oracle_;
  EnvOptions options_;
  std::mt19937_64 rng_;
  std::vector<Context> enabled_;

  bool active_ = false;
  Context context_ = Context::Piracy;
  std::size_t index_ = 0;
  Netlist current_;
  FeatureVector reference_{};
  unsigned t_ = 0;
  std::uint64_t oracle_calls_ = 0;
  std::uint64_t episodes_ = 0;
};

std::string trace_csv_header();
std::string trace_csv_row( std::uint64_t episode, Transition const& t );

/// Writes `<dir>/<name>.blif`, creating the directory. Returns the path.
std::filesystem::path write_snapshot( std::filesystem::path const& dir, std::string const& name,
                                      Netlist const& netlist );

} // namespace netforge
