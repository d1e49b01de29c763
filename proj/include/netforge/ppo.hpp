#pragma once

#include <netforge/env.hpp>
#include <netforge/equivalence.hpp>

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace netforge
{

/// Fully connected net: tanh on hidden layers, linear output. Each layer is
/// stored as a row-major weight matrix followed by its bias.
struct Mlp
{
  std::vector<std::size_t> sizes;
  std::vector<double> params;

  Mlp() = default;
  explicit Mlp( std::vector<std::size_t> layer_sizes );

  std::size_t inputs() const { return sizes.front(); }
  std::size_t outputs() const { return sizes.back(); }
  std::size_t num_params() const { return params.size(); }

  /// Scaled normal init, weights ~ N(0, gain^2 / fan_in); the last layer uses `out_gain`.
  void init( std::mt19937_64& rng, double gain, double out_gain );

  struct Cache
  {
    /// Input then each layer's output.
    std::vector<std::vector<double>> act;
  };
  std::vector<double> forward( std::span<double const> x, Cache* cache = nullptr ) const;
  /// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
  void backward( Cache const& cache, std::span<double const> dout, std::span<double> grad ) const;

  bool operator==( Mlp const& ) const = default;
};

struct PolicyParams
{
  Mlp policy;
  Mlp value;

  std::size_t num_params() const { return policy.num_params() + value.num_params(); }
  bool operator==( PolicyParams const& ) const = default;
};

/// 17 -> hidden -> hidden -> 11 policy and 17 -> hidden -> hidden -> 1 value.
PolicyParams make_policy( std::mt19937_64& rng, std::size_t hidden = 64 );

struct PolicyOutput
{
  std::vector<double> logits;
  std::vector<double> probs;
  double value = 0.0;
};

/// Throws NumericError on a non-finite output.
PolicyOutput forward( PolicyParams const& params, std::span<double const> obs );
PolicyOutput forward( PolicyParams const& params, Observation const& obs );

std::vector<double> to_input( Observation const& obs );

struct TrainConfig
{
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_ratio = 0.2;
  double learning_rate = 3e-4;
  unsigned update_epochs = 10;
  std::size_t minibatch_size = 8;
  double entropy_coef = 0.0;
  double value_coef = 0.5;
  double max_grad_norm = 0.5;
  /// Steps per rollout phase (J).
  std::size_t rollout_steps = 32;
  std::uint64_t total_steps = 2000;
  std::uint64_t seed = 0;
  std::size_t hidden = 64;
  /// Environment instances stepped side by side.
  std::size_t workers = 1;

  /// Every problem found, empty when valid.
  std::vector<std::string> problems() const;
  nlohmann::json to_json() const;
  static TrainConfig from_json( nlohmann::json const& j );
  bool operator==( TrainConfig const& ) const = default;
};

struct Sample
{
  std::vector<double> obs;
  std::size_t action = 0;
  double old_logp = 0.0;
  double advantage = 0.0;
  double ret = 0.0;
};

struct LossTerms
{
  double total = 0.0;
  double policy = 0.0;
  double value = 0.0;
  double entropy = 0.0;
  double clip_fraction = 0.0;
};

/// Clipped surrogate + value_coef * MSE(value, return) - entropy_coef * entropy,
/// averaged over the batch. Gradients are written when the spans are non-empty.
LossTerms ppo_loss( PolicyParams const& params, std::span<Sample const> batch, TrainConfig const& config,
                    std::span<double> grad_policy = {}, std::span<double> grad_value = {} );

/// Largest relative error between ppo_loss gradients and central finite
/// differences on a random 10-parameter policy net (1-1-1-3) and 6-parameter
/// value net, with sampled ratios kept off the clip boundaries.
double gradient_check( std::uint64_t seed );

struct Adam
{
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t t = 0;
  std::vector<double> m;
  std::vector<double> v;

  /// params -= lr * mhat / (sqrt(vhat) + eps), over the flat parameter view.
  void step( PolicyParams& params, std::span<double const> grad, double lr );
  bool operator==( Adam const& ) const = default;
};

struct RolloutStep
{
  std::size_t worker = 0;
  Observation obs{};
  std::size_t action = 0;
  double logp = 0.0;
  double reward = 0.0;
  double value = 0.0;
  bool done = false;
};

struct RolloutBuffer
{
  std::vector<RolloutStep> steps;
  /// Value of each worker's next observation, for bootstrapping a cut episode.
  std::vector<double> last_values;
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Generalized advantage estimation per worker stream; done steps do not
/// bootstrap, the last unfinished step bootstraps from last_values.
void gae( RolloutBuffer& buffer, double gamma, double lambda );
/// Zero mean, unit variance (left as is when the spread is ~0).
void normalize( std::vector<double>& v );

/// Runs update_epochs passes of shuffled minibatches with gradient-norm
/// clipping. Restores the previous params/optimizer and throws NumericError
/// when the loss or gradient becomes non-finite.
LossTerms ppo_update( PolicyParams& params, Adam& adam, RolloutBuffer const& buffer, TrainConfig const& config,
                      std::mt19937_64& rng );

struct TrainState
{
  TrainConfig config;
  PolicyParams params;
  Adam adam;
  std::uint64_t steps = 0;
  std::uint64_t rollouts = 0;
  std::uint64_t oracle_calls = 0;
  std::uint64_t episodes = 0;
  std::uint64_t successes = 0;
  std::string rng_state;

  bool operator==( TrainState const& ) const = default;
};

TrainState init_train_state( TrainConfig const& config );

inline constexpr int checkpoint_version = 1;
nlohmann::json checkpoint_json( TrainState const& state );
/// Throws ParseError on a malformed or unknown-version checkpoint.
TrainState checkpoint_from_json( nlohmann::json const& j );
void save_checkpoint( std::filesystem::path const& path, TrainState const& state );
TrainState load_checkpoint( std::filesystem::path const& path );

struct RolloutLog
{
  std::uint64_t step = 0;
  std::uint64_t rollout = 0;
  std::uint64_t episodes = 0;
  /// Mean return of the episodes that ended in this rollout.
  std::optional<double> mean_reward;
  std::array<std::optional<double>, num_contexts> success_rate;
  std::uint64_t oracle_calls = 0;
  std::uint64_t total_episodes = 0;
  std::uint64_t total_successes = 0;
  LossTerms loss;
  std::uint64_t failures = 0;
};

std::string train_log_header();
std::string train_log_row( RolloutLog const& row );
std::string queries_log_header();
std::string queries_log_row( RolloutLog const& row );

using RolloutCallback = std::function<void( RolloutLog const&, std::vector<Transition> const& )>;

/// Collects J steps from `envs` (one per worker) with the current policy.
/// An environment error drops the broken episode and starts a new one;
/// NumericError and oracle transport errors (protocol, timeout) propagate.
RolloutBuffer rollout( PolicyParams const& params, std::vector<CircuitEnv>& envs, std::size_t steps,
                       std::mt19937_64& rng, std::vector<Transition>* transitions = nullptr,
                       std::uint64_t* failures = nullptr );

/// Alternates rollout and ppo_update until state.steps reaches
/// config.total_steps; a trailing partial rollout is not taken.
void train( TrainState& state, std::vector<CircuitEnv>& envs, RolloutCallback const& on_rollout = {} );

/// Samples an action; exposed for evaluation code.
std::size_t sample_action( PolicyOutput const& out, std::mt19937_64& rng );

struct AttackEpisode
{
  std::size_t episode = 0;
  double value = 0.0;
  bool success = false;
  std::optional<EquivalenceStatus> equivalence;
  std::vector<ActionId> actions;
};

struct AdversarialCircuit
{
  Netlist netlist;
  OracleScore score;
  EquivalenceVerdict verdict;
  std::uint64_t hash = 0;
  std::vector<ActionId> actions;
};

struct AttackResult
{
  std::vector<AttackEpisode> episodes;
  /// Distinct successful final circuits, in order of discovery.
  std::vector<AdversarialCircuit> successes;
};

/// Runs `budget` stochastic episodes from `target` and keeps every distinct
/// successful final circuit with its equivalence verdict.
AttackResult attack( PolicyParams const& params, PoolEntry const& target, Context context, std::size_t budget,
                     std::shared_ptr<OracleBackend> oracle, EnvOptions options = {}, std::uint64_t seed = 0 );

/// FNV-1a over the BLIF text.
std::uint64_t netlist_hash( Netlist const& netlist );

} // namespace netforge
