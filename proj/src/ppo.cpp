#include <netforge/ppo.hpp>

#include <netforge/error.hpp>
#include <netforge/io.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <numeric>
#include <sstream>

namespace netforge
{

using nlohmann::json;

Mlp::Mlp( std::vector<std::size_t> layer_sizes ) : sizes( std::move( layer_sizes ) )
{
  if ( sizes.size() < 2 )
    throw Error( "a network needs at least an input and an output layer" );
  std::size_t n = 0;
  for ( std::size_t l = 0; l + 1 < sizes.size(); ++l )
    n += sizes[l + 1] * sizes[l] + sizes[l + 1];
  params.assign( n, 0.0 );
}

void Mlp::init( std::mt19937_64& rng, double gain, double out_gain )
{
  std::normal_distribution<double> normal( 0.0, 1.0 );
  std::size_t k = 0;
  for ( std::size_t l = 0; l + 1 < sizes.size(); ++l )
  {
    bool const last = l + 2 == sizes.size();
    double const scale = ( last ? out_gain : gain ) / std::sqrt( static_cast<double>( sizes[l] ) );
    for ( std::size_t i = 0; i < sizes[l + 1] * sizes[l]; ++i )
      params[k++] = scale * normal( rng );
    for ( std::size_t i = 0; i < sizes[l + 1]; ++i )
      params[k++] = 0.0;
  }
}

std::vector<double> Mlp::forward( std::span<double const> x, Cache* cache ) const
{
  if ( x.size() != inputs() )
    throw Error( "network expects " + std::to_string( inputs() ) + " inputs, got " + std::to_string( x.size() ) );
  std::vector<double> a( x.begin(), x.end() );
  if ( cache )
  {
    cache->act.clear();
    cache->act.push_back( a );
  }
  std::size_t k = 0;
  for ( std::size_t l = 0; l + 1 < sizes.size(); ++l )
  {
    auto const in = sizes[l];
    auto const out = sizes[l + 1];
    bool const last = l + 2 == sizes.size();
    std::vector<double> z( out );
    double const* w = params.data() + k;
    double const* b = w + out * in;
    for ( std::size_t o = 0; o < out; ++o )
    {
      double s = b[o];
      for ( std::size_t i = 0; i < in; ++i )
        s += w[o * in + i] * a[i];
      z[o] = last ? s : std::tanh( s );
    }
    k += out * in + out;
    a = std::move( z );
    if ( cache )
      cache->act.push_back( a );
  }
  return a;
}

void Mlp::backward( Cache const& cache, std::span<double const> dout, std::span<double> grad ) const
{
  std::vector<std::size_t> offset( sizes.size() - 1 );
  std::size_t k = 0;
  for ( std::size_t l = 0; l + 1 < sizes.size(); ++l )
  {
    offset[l] = k;
    k += sizes[l + 1] * sizes[l] + sizes[l + 1];
  }
  std::vector<double> delta( dout.begin(), dout.end() );
  for ( std::size_t l = sizes.size() - 1; l-- > 0; )
  {
    auto const in = sizes[l];
    auto const out = sizes[l + 1];
    auto const& a = cache.act[l];
    double const* w = params.data() + offset[l];
    double* gw = grad.data() + offset[l];
    double* gb = gw + out * in;
    for ( std::size_t o = 0; o < out; ++o )
    {
      for ( std::size_t i = 0; i < in; ++i )
        gw[o * in + i] += delta[o] * a[i];
      gb[o] += delta[o];
    }
    if ( l == 0 )
      break;
    std::vector<double> prev( in, 0.0 );
    for ( std::size_t o = 0; o < out; ++o )
    {
      for ( std::size_t i = 0; i < in; ++i )
        prev[i] += w[o * in + i] * delta[o];
    }
    for ( std::size_t i = 0; i < in; ++i )
      prev[i] *= 1.0 - a[i] * a[i];
    delta = std::move( prev );
  }
}

PolicyParams make_policy( std::mt19937_64& rng, std::size_t hidden )
{
  PolicyParams p{ Mlp( { observation_size, hidden, hidden, num_actions } ), Mlp( { observation_size, hidden, hidden, 1 } ) };
  p.policy.init( rng, std::sqrt( 2.0 ), 0.01 );
  p.value.init( rng, std::sqrt( 2.0 ), 1.0 );
  return p;
}

namespace
{

void softmax( std::vector<double> const& logits, std::vector<double>& probs, std::vector<double>& logp )
{
  double const mx = *std::max_element( logits.begin(), logits.end() );
  double sum = 0.0;
  for ( auto const z : logits )
    sum += std::exp( z - mx );
  double const lse = mx + std::log( sum );
  probs.resize( logits.size() );
  logp.resize( logits.size() );
  for ( std::size_t k = 0; k < logits.size(); ++k )
  {
    logp[k] = logits[k] - lse;
    probs[k] = std::exp( logp[k] );
  }
}

bool all_finite( std::span<double const> v )
{
  return std::all_of( v.begin(), v.end(), []( double x ) { return std::isfinite( x ); } );
}

} // namespace

PolicyOutput forward( PolicyParams const& params, std::span<double const> obs )
{
  PolicyOutput out;
  out.logits = params.policy.forward( obs );
  std::vector<double> logp;
  softmax( out.logits, out.probs, logp );
  out.value = params.value.forward( obs ).at( 0 );
  if ( !all_finite( out.logits ) || !all_finite( out.probs ) || !std::isfinite( out.value ) )
    throw NumericError( "policy or value network produced a non-finite output" );
  return out;
}

std::vector<double> to_input( Observation const& obs )
{
  return { obs.begin(), obs.end() };
}

PolicyOutput forward( PolicyParams const& params, Observation const& obs )
{
  auto const x = to_input( obs );
  return forward( params, std::span<double const>( x ) );
}

std::vector<std::string> TrainConfig::problems() const
{
  std::vector<std::string> p;
  if ( !( gamma >= 0.0 && gamma <= 1.0 ) )
    p.push_back( "gamma must be in [0, 1]" );
  if ( !( gae_lambda >= 0.0 && gae_lambda <= 1.0 ) )
    p.push_back( "gae_lambda must be in [0, 1]" );
  if ( !( clip_ratio > 0.0 && clip_ratio < 1.0 ) )
    p.push_back( "clip_ratio must be in (0, 1)" );
  if ( !( learning_rate > 0.0 ) )
    p.push_back( "learning_rate must be positive" );
  if ( update_epochs == 0 )
    p.push_back( "update_epochs must be at least 1" );
  if ( rollout_steps == 0 )
    p.push_back( "rollout_steps must be at least 1" );
  if ( minibatch_size == 0 || ( rollout_steps && rollout_steps % minibatch_size != 0 ) )
    p.push_back( "minibatch_size must divide rollout_steps" );
  if ( !( entropy_coef >= 0.0 ) )
    p.push_back( "entropy_coef must be non-negative" );
  if ( !( value_coef >= 0.0 ) )
    p.push_back( "value_coef must be non-negative" );
  if ( !( max_grad_norm > 0.0 ) )
    p.push_back( "max_grad_norm must be positive" );
  if ( hidden == 0 )
    p.push_back( "hidden must be at least 1" );
  if ( workers == 0 || ( rollout_steps && rollout_steps % workers != 0 ) )
    p.push_back( "workers must divide rollout_steps" );
  return p;
}

json TrainConfig::to_json() const
{
  return { { "gamma", gamma },
           { "gae_lambda", gae_lambda },
           { "clip_ratio", clip_ratio },
           { "learning_rate", learning_rate },
           { "update_epochs", update_epochs },
           { "minibatch_size", minibatch_size },
           { "entropy_coef", entropy_coef },
           { "value_coef", value_coef },
           { "max_grad_norm", max_grad_norm },
           { "rollout_steps", rollout_steps },
           { "total_steps", total_steps },
           { "seed", seed },
           { "hidden", hidden },
           { "workers", workers } };
}

TrainConfig TrainConfig::from_json( json const& j )
{
  TrainConfig c;
  c.gamma = j.at( "gamma" ).get<double>();
  c.gae_lambda = j.at( "gae_lambda" ).get<double>();
  c.clip_ratio = j.at( "clip_ratio" ).get<double>();
  c.learning_rate = j.at( "learning_rate" ).get<double>();
  c.update_epochs = j.at( "update_epochs" ).get<unsigned>();
  c.minibatch_size = j.at( "minibatch_size" ).get<std::size_t>();
  c.entropy_coef = j.at( "entropy_coef" ).get<double>();
  c.value_coef = j.at( "value_coef" ).get<double>();
  c.max_grad_norm = j.at( "max_grad_norm" ).get<double>();
  c.rollout_steps = j.at( "rollout_steps" ).get<std::size_t>();
  c.total_steps = j.at( "total_steps" ).get<std::uint64_t>();
  c.seed = j.at( "seed" ).get<std::uint64_t>();
  c.hidden = j.at( "hidden" ).get<std::size_t>();
  c.workers = j.at( "workers" ).get<std::size_t>();
  return c;
}

LossTerms ppo_loss( PolicyParams const& params, std::span<Sample const> batch, TrainConfig const& config,
                    std::span<double> grad_policy, std::span<double> grad_value )
{
  LossTerms L;
  if ( batch.empty() )
    return L;
  bool const want_grad = !grad_policy.empty() || !grad_value.empty();
  if ( want_grad && ( grad_policy.size() != params.policy.num_params() || grad_value.size() != params.value.num_params() ) )
    throw Error( "gradient buffers do not match the parameter count" );
  double const n = static_cast<double>( batch.size() );
  double const eps = config.clip_ratio;
  Mlp::Cache pc, vc;
  std::vector<double> probs, logp, dlogits;
  for ( auto const& s : batch )
  {
    auto const logits = params.policy.forward( s.obs, want_grad ? &pc : nullptr );
    if ( s.action >= logits.size() )
      throw Error( "sample action out of range" );
    softmax( logits, probs, logp );
    double const ratio = std::exp( logp[s.action] - s.old_logp );
    double const clipped = std::clamp( ratio, 1.0 - eps, 1.0 + eps );
    double const surr1 = ratio * s.advantage;
    double const surr2 = clipped * s.advantage;
    bool const unclipped = surr1 <= surr2;
    L.policy -= std::min( surr1, surr2 ) / n;
    if ( std::abs( ratio - 1.0 ) > eps )
      L.clip_fraction += 1.0 / n;

    double h = 0.0;
    for ( std::size_t k = 0; k < probs.size(); ++k )
      h -= probs[k] * logp[k];
    L.entropy += h / n;

    double const v = params.value.forward( s.obs, want_grad ? &vc : nullptr ).at( 0 );
    L.value += ( v - s.ret ) * ( v - s.ret ) / n;

    if ( !want_grad )
      continue;
    // d/dlogits of the policy and entropy terms
    double const g_logp = unclipped ? -s.advantage * ratio / n : 0.0;
    dlogits.assign( probs.size(), 0.0 );
    for ( std::size_t k = 0; k < probs.size(); ++k )
    {
      dlogits[k] = g_logp * ( ( k == s.action ? 1.0 : 0.0 ) - probs[k] );
      dlogits[k] += config.entropy_coef / n * probs[k] * ( logp[k] + h );
    }
    params.policy.backward( pc, dlogits, grad_policy );
    double const dv = 2.0 * config.value_coef * ( v - s.ret ) / n;
    params.value.backward( vc, std::span<double const>( &dv, 1 ), grad_value );
  }
  L.total = L.policy + config.value_coef * L.value - config.entropy_coef * L.entropy;
  return L;
}

double gradient_check( std::uint64_t seed )
{
  std::mt19937_64 rng( seed );
  std::normal_distribution<double> normal( 0.0, 1.0 );
  std::uniform_real_distribution<double> unit( 0.0, 1.0 );
  PolicyParams p{ Mlp( { 1, 1, 1, 3 } ), Mlp( { 1, 1, 1, 1 } ) };
  for ( auto& w : p.policy.params )
    w = normal( rng );
  for ( auto& w : p.value.params )
    w = normal( rng );

  TrainConfig cfg;
  cfg.clip_ratio = 0.2;
  cfg.value_coef = 0.5;
  cfg.entropy_coef = 0.01 + 0.1 * unit( rng );

  std::vector<Sample> batch( 4 );
  std::vector<double> probs, logp;
  for ( auto& s : batch )
  {
    s.obs = { normal( rng ) };
    s.action = rng() % 3;
    s.advantage = normal( rng );
    s.ret = normal( rng );
    softmax( p.policy.forward( s.obs ), probs, logp );
    // ratio well inside or well outside the clip band
    static constexpr std::array<std::pair<double, double>, 3> bands = { { { 0.5, 0.75 }, { 0.85, 1.15 }, { 1.25, 1.6 } } };
    auto const& band = bands[rng() % bands.size()];
    double const ratio = band.first + ( band.second - band.first ) * unit( rng );
    s.old_logp = logp[s.action] - std::log( ratio );
  }

  std::vector<double> gp( p.policy.num_params(), 0.0 ), gv( p.value.num_params(), 0.0 );
  ppo_loss( p, batch, cfg, gp, gv );

  // Five-point central stencil: with first-layer gradients near 1e-7, a
  // two-point difference is dominated by rounding before truncation.
  double worst = 0.0;
  double const h = 1e-4;
  auto check = [&]( std::vector<double>& params, std::vector<double> const& grad ) {
    for ( std::size_t i = 0; i < params.size(); ++i )
    {
      double const keep = params[i];
      auto at = [&]( double d ) {
        params[i] = keep + d;
        return ppo_loss( p, batch, cfg ).total;
      };
      double const numeric = ( at( -2 * h ) - 8 * at( -h ) + 8 * at( h ) - at( 2 * h ) ) / ( 12.0 * h );
      params[i] = keep;
      double const scale = std::max( { std::abs( numeric ), std::abs( grad[i] ), 1e-6 } );
      worst = std::max( worst, std::abs( numeric - grad[i] ) / scale );
    }
  };
  check( p.policy.params, gp );
  check( p.value.params, gv );
  return worst;
}

void Adam::step( PolicyParams& params, std::span<double const> grad, double lr )
{
  auto const np = params.policy.num_params();
  auto const n = params.num_params();
  if ( grad.size() != n )
    throw Error( "gradient size does not match the parameter count" );
  if ( m.size() != n )
  {
    m.assign( n, 0.0 );
    v.assign( n, 0.0 );
  }
  ++t;
  double const c1 = 1.0 - std::pow( beta1, static_cast<double>( t ) );
  double const c2 = 1.0 - std::pow( beta2, static_cast<double>( t ) );
  for ( std::size_t i = 0; i < n; ++i )
  {
    m[i] = beta1 * m[i] + ( 1.0 - beta1 ) * grad[i];
    v[i] = beta2 * v[i] + ( 1.0 - beta2 ) * grad[i] * grad[i];
    double const upd = lr * ( m[i] / c1 ) / ( std::sqrt( v[i] / c2 ) + eps );
    if ( i < np )
      params.policy.params[i] -= upd;
    else
      params.value.params[i - np] -= upd;
  }
}

void gae( RolloutBuffer& buffer, double gamma, double lambda )
{
  auto const n = buffer.steps.size();
  buffer.advantages.assign( n, 0.0 );
  buffer.returns.assign( n, 0.0 );
  std::vector<double> next_value = buffer.last_values;
  std::vector<double> next_adv( next_value.size(), 0.0 );
  for ( std::size_t i = n; i-- > 0; )
  {
    auto const& s = buffer.steps[i];
    if ( s.worker >= next_value.size() )
      throw Error( "rollout step refers to an unknown worker" );
    double const live = s.done ? 0.0 : 1.0;
    double const delta = s.reward + gamma * next_value[s.worker] * live - s.value;
    double const adv = delta + gamma * lambda * live * next_adv[s.worker];
    buffer.advantages[i] = adv;
    buffer.returns[i] = adv + s.value;
    next_value[s.worker] = s.value;
    next_adv[s.worker] = adv;
  }
}

void normalize( std::vector<double>& v )
{
  if ( v.size() < 2 )
    return;
  double const mean = std::accumulate( v.begin(), v.end(), 0.0 ) / static_cast<double>( v.size() );
  double var = 0.0;
  for ( auto const x : v )
    var += ( x - mean ) * ( x - mean );
  double const sd = std::sqrt( var / static_cast<double>( v.size() ) );
  for ( auto& x : v )
    x = ( x - mean ) / ( sd + 1e-8 );
}

LossTerms ppo_update( PolicyParams& params, Adam& adam, RolloutBuffer const& buffer, TrainConfig const& config,
                      std::mt19937_64& rng )
{
  auto const n = buffer.steps.size();
  if ( buffer.advantages.size() != n || buffer.returns.size() != n )
    throw Error( "run gae before ppo_update" );
  auto adv = buffer.advantages;
  normalize( adv );
  std::vector<Sample> samples( n );
  for ( std::size_t i = 0; i < n; ++i )
    samples[i] = { to_input( buffer.steps[i].obs ), buffer.steps[i].action, buffer.steps[i].logp, adv[i], buffer.returns[i] };

  auto const saved_params = params;
  auto const saved_adam = adam;
  auto const np = params.policy.num_params();
  std::vector<double> grad( params.num_params() );
  std::vector<std::size_t> order( n );
  std::iota( order.begin(), order.end(), 0 );
  std::vector<Sample> batch;
  LossTerms mean;
  std::size_t batches = 0;
  for ( unsigned epoch = 0; epoch < config.update_epochs; ++epoch )
  {
    std::shuffle( order.begin(), order.end(), rng );
    for ( std::size_t start = 0; start < n; start += config.minibatch_size )
    {
      batch.clear();
      for ( std::size_t i = start; i < std::min( n, start + config.minibatch_size ); ++i )
        batch.push_back( samples[order[i]] );
      std::fill( grad.begin(), grad.end(), 0.0 );
      auto const L = ppo_loss( params, batch, config, std::span<double>( grad.data(), np ),
                               std::span<double>( grad.data() + np, grad.size() - np ) );
      double norm = 0.0;
      for ( auto const g : grad )
        norm += g * g;
      norm = std::sqrt( norm );
      if ( !std::isfinite( L.total ) || !std::isfinite( norm ) )
      {
        params = saved_params;
        adam = saved_adam;
        throw NumericError( "non-finite loss or gradient during the policy update" );
      }
      if ( norm > config.max_grad_norm )
      {
        double const scale = config.max_grad_norm / ( norm + 1e-6 );
        for ( auto& g : grad )
          g *= scale;
      }
      adam.step( params, grad, config.learning_rate );
      mean.total += L.total;
      mean.policy += L.policy;
      mean.value += L.value;
      mean.entropy += L.entropy;
      mean.clip_fraction += L.clip_fraction;
      ++batches;
    }
  }
  if ( batches )
  {
    double const b = static_cast<double>( batches );
    mean.total /= b;
    mean.policy /= b;
    mean.value /= b;
    mean.entropy /= b;
    mean.clip_fraction /= b;
  }
  return mean;
}

namespace
{

std::string rng_to_string( std::mt19937_64 const& rng )
{
  std::ostringstream os;
  os << rng;
  return os.str();
}

std::mt19937_64 rng_from_string( std::string const& s )
{
  std::mt19937_64 rng;
  std::istringstream is( s );
  is >> rng;
  if ( !is )
    throw ParseError( "bad random generator state", 1, 1 );
  return rng;
}

std::string fmt( double v )
{
  char buf[32];
  std::snprintf( buf, sizeof buf, "%.17g", v );
  return buf;
}

std::string fmt( std::optional<double> v )
{
  return v ? fmt( *v ) : std::string();
}

json mlp_json( Mlp const& m )
{
  return { { "sizes", m.sizes }, { "params", m.params } };
}

Mlp mlp_from_json( json const& j )
{
  Mlp m( j.at( "sizes" ).get<std::vector<std::size_t>>() );
  auto p = j.at( "params" ).get<std::vector<double>>();
  if ( p.size() != m.params.size() )
    throw ParseError( "parameter count does not match the layer sizes", 1, 1 );
  m.params = std::move( p );
  return m;
}

} // namespace

TrainState init_train_state( TrainConfig const& config )
{
  auto const problems = config.problems();
  if ( !problems.empty() )
  {
    std::string msg = "invalid training configuration:";
    for ( auto const& p : problems )
      msg += "\n  " + p;
    throw Error( msg );
  }
  TrainState s;
  s.config = config;
  std::mt19937_64 rng( config.seed );
  s.params = make_policy( rng, config.hidden );
  s.rng_state = rng_to_string( rng );
  return s;
}

json checkpoint_json( TrainState const& s )
{
  return { { "format", "netforge-checkpoint" },
           { "version", checkpoint_version },
           { "config", s.config.to_json() },
           { "policy", mlp_json( s.params.policy ) },
           { "value", mlp_json( s.params.value ) },
           { "adam", { { "t", s.adam.t }, { "m", s.adam.m }, { "v", s.adam.v } } },
           { "steps", s.steps },
           { "rollouts", s.rollouts },
           { "oracle_calls", s.oracle_calls },
           { "episodes", s.episodes },
           { "successes", s.successes },
           { "rng", s.rng_state } };
}

TrainState checkpoint_from_json( json const& j )
{
  try
  {
    if ( j.at( "format" ).get<std::string>() != "netforge-checkpoint" )
      throw ParseError( "not a checkpoint", 1, 1 );
    if ( j.at( "version" ).get<int>() != checkpoint_version )
      throw ParseError( "unsupported checkpoint version " + j.at( "version" ).dump(), 1, 1 );
    TrainState s;
    s.config = TrainConfig::from_json( j.at( "config" ) );
    s.params.policy = mlp_from_json( j.at( "policy" ) );
    s.params.value = mlp_from_json( j.at( "value" ) );
    if ( s.params.policy.inputs() != observation_size || s.params.policy.outputs() != num_actions ||
         s.params.value.inputs() != observation_size || s.params.value.outputs() != 1 )
      throw ParseError( "network shapes do not match the observation and action spaces", 1, 1 );
    auto const& a = j.at( "adam" );
    s.adam.t = a.at( "t" ).get<std::uint64_t>();
    s.adam.m = a.at( "m" ).get<std::vector<double>>();
    s.adam.v = a.at( "v" ).get<std::vector<double>>();
    if ( s.adam.m.size() != s.adam.v.size() || ( !s.adam.m.empty() && s.adam.m.size() != s.params.num_params() ) )
      throw ParseError( "optimizer state does not match the parameter count", 1, 1 );
    s.steps = j.at( "steps" ).get<std::uint64_t>();
    s.rollouts = j.at( "rollouts" ).get<std::uint64_t>();
    s.oracle_calls = j.at( "oracle_calls" ).get<std::uint64_t>();
    s.episodes = j.at( "episodes" ).get<std::uint64_t>();
    s.successes = j.at( "successes" ).get<std::uint64_t>();
    s.rng_state = j.at( "rng" ).get<std::string>();
    rng_from_string( s.rng_state );
    return s;
  }
  catch ( json::exception const& e )
  {
    throw ParseError( std::string( "malformed checkpoint: " ) + e.what(), 1, 1 );
  }
}

void save_checkpoint( std::filesystem::path const& path, TrainState const& state )
{
  write_text_file( path, checkpoint_json( state ).dump( 1 ) + "\n" );
}

TrainState load_checkpoint( std::filesystem::path const& path )
{
  json j;
  try
  {
    j = json::parse( read_text_file( path ) );
  }
  catch ( json::parse_error const& e )
  {
    throw ParseError( path.string() + ": " + e.what(), 1, 1 );
  }
  return checkpoint_from_json( j );
}

std::string train_log_header()
{
  std::string h = "step,rollout,episodes,mean_reward";
  for ( auto const c : all_contexts )
    h += ",success_" + std::string( to_string( c ) );
  return h + ",oracle_calls,policy_loss,value_loss,entropy,clip_fraction,env_failures";
}

std::string train_log_row( RolloutLog const& r )
{
  std::string row = std::to_string( r.step ) + "," + std::to_string( r.rollout ) + "," + std::to_string( r.episodes ) +
                    "," + fmt( r.mean_reward );
  for ( auto const& s : r.success_rate )
    row += "," + fmt( s );
  return row + "," + std::to_string( r.oracle_calls ) + "," + fmt( r.loss.policy ) + "," + fmt( r.loss.value ) + "," +
         fmt( r.loss.entropy ) + "," + fmt( r.loss.clip_fraction ) + "," + std::to_string( r.failures );
}

std::string queries_log_header()
{
  return "oracle_calls,episodes,successes,success_rate";
}

std::string queries_log_row( RolloutLog const& r )
{
  double const rate = r.total_episodes ? static_cast<double>( r.total_successes ) / static_cast<double>( r.total_episodes ) : 0.0;
  return std::to_string( r.oracle_calls ) + "," + std::to_string( r.total_episodes ) + "," +
         std::to_string( r.total_successes ) + "," + fmt( rate );
}

std::size_t sample_action( PolicyOutput const& out, std::mt19937_64& rng )
{
  double u = std::uniform_real_distribution<double>( 0.0, 1.0 )( rng );
  for ( std::size_t k = 0; k < out.probs.size(); ++k )
  {
    u -= out.probs[k];
    if ( u < 0.0 )
      return k;
  }
  return out.probs.size() - 1;
}

RolloutBuffer rollout( PolicyParams const& params, std::vector<CircuitEnv>& envs, std::size_t steps,
                       std::mt19937_64& rng, std::vector<Transition>* transitions, std::uint64_t* failures )
{
  if ( envs.empty() )
    throw Error( "rollout needs at least one environment" );
  auto const w = envs.size();
  RolloutBuffer buf;
  buf.steps.reserve( steps );
  std::uint64_t failed = 0;
  std::vector<RolloutStep> pending( w );
  std::vector<std::optional<Transition>> results( w );
  std::vector<std::exception_ptr> errors( w );

  while ( buf.steps.size() < steps )
  {
    for ( std::size_t i = 0; i < w; ++i )
    {
      if ( !envs[i].active() )
        envs[i].reset();
      auto const obs = envs[i].observation();
      auto const out = forward( params, obs );
      auto const a = sample_action( out, rng );
      pending[i] = { i, obs, a, std::log( out.probs[a] ), 0.0, out.value, false };
    }
#pragma omp parallel for schedule( static ) if ( w > 1 )
    for ( std::size_t i = 0; i < w; ++i )
    {
      try
      {
        results[i] = envs[i].step( action_from_index( pending[i].action ) );
        errors[i] = nullptr;
      }
      catch ( std::exception const& )
      {
        results[i].reset();
        errors[i] = std::current_exception();
      }
    }
    for ( std::size_t i = 0; i < w && buf.steps.size() < steps; ++i )
    {
      if ( errors[i] )
      {
        try
        {
          std::rethrow_exception( errors[i] );
        }
        catch ( NumericError const& )
        {
          throw;
        }
        catch ( ProtocolError const& )
        {
          throw;
        }
        catch ( TimeoutError const& )
        {
          throw;
        }
        catch ( std::exception const& )
        {
          // drop the broken episode and start over
          ++failed;
          if ( failed > 100 + 10 * steps )
            throw;
          for ( auto it = buf.steps.rbegin(); it != buf.steps.rend(); ++it )
          {
            if ( it->worker == i )
            {
              it->done = true;
              break;
            }
          }
          envs[i].reset();
        }
        continue;
      }
      auto& s = pending[i];
      s.reward = results[i]->reward;
      s.done = results[i]->done;
      buf.steps.push_back( s );
      if ( transitions )
        transitions->push_back( std::move( *results[i] ) );
    }
  }
  buf.last_values.assign( w, 0.0 );
  for ( std::size_t i = 0; i < w; ++i )
  {
    if ( envs[i].active() )
      buf.last_values[i] = forward( params, envs[i].observation() ).value;
  }
  if ( failures )
    *failures += failed;
  return buf;
}

void train( TrainState& state, std::vector<CircuitEnv>& envs, RolloutCallback const& on_rollout )
{
  auto const& cfg = state.config;
  auto const problems = cfg.problems();
  if ( !problems.empty() )
    throw Error( "invalid training configuration: " + problems.front() );
  if ( envs.size() != cfg.workers )
    throw Error( "expected " + std::to_string( cfg.workers ) + " environments, got " + std::to_string( envs.size() ) );
  auto rng = rng_from_string( state.rng_state );
  auto calls = [&] {
    std::uint64_t c = 0;
    for ( auto const& e : envs )
      c += e.oracle_calls();
    return c;
  };
  std::vector<double> running( envs.size(), 0.0 );

  while ( state.steps + cfg.rollout_steps <= cfg.total_steps )
  {
    auto const calls_before = calls();
    std::vector<Transition> trans;
    RolloutLog log;
    auto buf = rollout( state.params, envs, cfg.rollout_steps, rng, &trans, &log.failures );
    gae( buf, cfg.gamma, cfg.gae_lambda );
    log.loss = ppo_update( state.params, state.adam, buf, cfg, rng );

    std::array<std::uint64_t, num_contexts> eps{}, wins{};
    double returns = 0.0;
    for ( std::size_t i = 0; i < trans.size(); ++i )
    {
      auto const w = buf.steps[i].worker;
      running[w] += trans[i].reward;
      if ( !trans[i].done )
        continue;
      ++log.episodes;
      returns += running[w];
      running[w] = 0.0;
      ++eps[index_of( trans[i].context )];
      wins[index_of( trans[i].context )] += trans[i].success;
    }
    state.steps += cfg.rollout_steps;
    ++state.rollouts;
    state.oracle_calls += calls() - calls_before;
    state.episodes += log.episodes;
    for ( auto const w : wins )
      state.successes += w;
    state.rng_state = rng_to_string( rng );

    log.step = state.steps;
    log.rollout = state.rollouts;
    if ( log.episodes )
      log.mean_reward = returns / static_cast<double>( log.episodes );
    for ( std::size_t c = 0; c < num_contexts; ++c )
    {
      if ( eps[c] )
        log.success_rate[c] = static_cast<double>( wins[c] ) / static_cast<double>( eps[c] );
    }
    log.oracle_calls = state.oracle_calls;
    log.total_episodes = state.episodes;
    log.total_successes = state.successes;
    if ( on_rollout )
      on_rollout( log, trans );
  }
}

std::uint64_t netlist_hash( Netlist const& netlist )
{
  std::uint64_t h = 1469598103934665603ull;
  for ( unsigned char const c : write_blif( netlist ) )
  {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

AttackResult attack( PolicyParams const& params, PoolEntry const& target, Context context, std::size_t budget,
                     std::shared_ptr<OracleBackend> oracle, EnvOptions options, std::uint64_t seed )
{
  Pools pools;
  pools[index_of( context )].push_back( target );
  CircuitEnv env( std::move( pools ), std::move( oracle ), options, seed );
  std::mt19937_64 rng( seed ^ 0x9e3779b97f4a7c15ull );
  AttackResult result;
  std::map<std::uint64_t, EquivalenceVerdict> verdicts;
  for ( std::size_t e = 0; e < budget; ++e )
  {
    AttackEpisode ep;
    ep.episode = e;
    env.reset( context, 0 );
    Transition last;
    while ( env.active() )
    {
      auto const out = forward( params, env.observation() );
      auto const a = action_from_index( sample_action( out, rng ) );
      ep.actions.push_back( a );
      last = env.step( a );
    }
    ep.value = last.oracle_value.value_or( 0.0 );
    ep.success = last.success;
    auto const h = netlist_hash( env.circuit() );
    auto it = verdicts.find( h );
    if ( it == verdicts.end() )
      it = verdicts.emplace( h, check_equivalence( target.circuit, env.circuit() ) ).first;
    ep.equivalence = it->second.status;
    if ( ep.success && it->second.equivalent() &&
         std::none_of( result.successes.begin(), result.successes.end(),
                       [&]( AdversarialCircuit const& s ) { return s.hash == h; } ) )
    {
      OracleScore score;
      score.context = context;
      score.metric = metric_for( context );
      score.value = ep.value;
      result.successes.push_back( { env.circuit(), score, it->second, h, ep.actions } );
    }
    result.episodes.push_back( std::move( ep ) );
  }
  return result;
}

} // namespace netforge
