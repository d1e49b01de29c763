#include <netforge/env.hpp>

#include <netforge/equivalence.hpp>
#include <netforge/error.hpp>
#include <netforge/generators.hpp>
#include <netforge/io.hpp>

#include <cmath>
#include <cstdio>

namespace netforge
{

unsigned default_horizon( Context context )
{
  switch ( context )
  {
  case Context::Piracy:
  case Context::Obfuscation:
    return 5;
  case Context::TrojanLoc:
  case Context::ReverseEng:
    return 1;
  }
  return 1;
}

double terminal_reward( Context context, double value, double alpha )
{
  switch ( context )
  {
  case Context::Piracy:
    return value < 0.0 ? alpha : 0.0;
  case Context::TrojanLoc:
  case Context::ReverseEng:
    return 1.0 - value;
  case Context::Obfuscation:
    return std::exp( -5.0 * std::abs( 0.5 - value ) );
  }
  return 0.0;
}

bool is_success( Context context, double value )
{
  switch ( context )
  {
  case Context::Piracy:
    return value < 0.0;
  case Context::TrojanLoc:
    return value < 0.5;
  case Context::ReverseEng:
    return value <= 0.25;
  case Context::Obfuscation:
    return value >= 0.5 && value <= 0.55;
  }
  return false;
}

namespace
{

std::vector<KeyGate> key_gates_of( Netlist const& candidate, PoolEntry const& origin )
{
  if ( origin.key_inputs.empty() || origin.key_inputs.size() != origin.key.size() )
    throw Error( "pool entry '" + origin.name + "' has no usable key" );
  auto const cells = locate_key_gates( candidate, origin.key_inputs );
  std::vector<KeyGate> gates;
  for ( std::size_t i = 0; i < cells.size(); ++i )
    gates.push_back( { cells[i], origin.key[i] } );
  return gates;
}

NodeModel const& need( std::optional<NodeModel> const& m, Context c )
{
  if ( !m )
    throw InterfaceError( "no surrogate model for context " + std::string( to_string( c ) ) );
  return *m;
}

} // namespace

OracleRequest make_request( Context context, Netlist const& candidate, PoolEntry const& origin )
{
  OracleRequest r;
  r.context = context;
  r.circuit_blif = write_blif( candidate );
  switch ( context )
  {
  case Context::Piracy:
    r.reference_blif = write_blif( origin.circuit );
    break;
  case Context::TrojanLoc:
    r.truth = truth_payload( candidate, trojan_truth( candidate ) );
    break;
  case Context::ReverseEng:
    r.truth = truth_payload( candidate, re_truth( candidate ) );
    break;
  case Context::Obfuscation:
    r.key_gates = key_payload( candidate, key_gates_of( candidate, origin ) );
    break;
  }
  return r;
}

OracleScore BuiltinOracle::score( Context context, Netlist const& candidate, PoolEntry const& origin )
{
  switch ( context )
  {
  case Context::Piracy:
    return piracy_score( candidate, origin.circuit, models_.tau, models_.h );
  case Context::TrojanLoc:
    return trojan_loc_score( candidate, trojan_truth( candidate ), need( models_.trojan, context ) );
  case Context::ReverseEng:
    return re_accuracy( candidate, re_truth( candidate ), need( models_.reverse_eng, context ) );
  case Context::Obfuscation:
    return key_prediction_accuracy( candidate, key_gates_of( candidate, origin ), need( models_.key, context ) );
  }
  throw InterfaceError( "unknown context" );
}

OracleScore ExternalOracle::score( Context context, Netlist const& candidate, PoolEntry const& origin )
{
  auto request = make_request( context, candidate, origin );
  std::lock_guard lock( mutex_ );
  return process_.query( request );
}

CircuitEnv::CircuitEnv( Pools pools, std::shared_ptr<OracleBackend> oracle, EnvOptions options, std::uint64_t seed )
    : pools_( std::move( pools ) ), oracle_( std::move( oracle ) ), options_( options ), rng_( seed )
{
  if ( !oracle_ )
    throw Error( "environment needs an oracle" );
  if ( !( options_.alpha > 0.0 ) )
    throw Error( "alpha must be positive" );
  if ( !( options_.gamma >= 0.0 && options_.gamma <= 1.0 ) )
    throw Error( "gamma must be in [0, 1]" );
  for ( auto const c : all_contexts )
  {
    if ( options_.horizon[index_of( c )] == 0 )
      throw Error( "episode length must be at least 1" );
    if ( !pools_[index_of( c )].empty() )
      enabled_.push_back( c );
  }
  if ( enabled_.empty() )
    throw Error( "every context pool is empty" );
}

PoolEntry const& CircuitEnv::origin() const
{
  return pools_[index_of( context_ )].at( index_ );
}

Observation CircuitEnv::observation() const
{
  return make_observation( extract_features( current_ ), reference_, context_ );
}

Observation CircuitEnv::reset( std::optional<Context> context )
{
  auto const c = context ? *context : enabled_[std::uniform_int_distribution<std::size_t>( 0, enabled_.size() - 1 )( rng_ )];
  auto const& pool = pools_[index_of( c )];
  if ( pool.empty() )
    throw Error( "no circuits registered for context " + std::string( to_string( c ) ) );
  return reset( c, std::uniform_int_distribution<std::size_t>( 0, pool.size() - 1 )( rng_ ) );
}

Observation CircuitEnv::reset( Context context, std::size_t index )
{
  auto const& pool = pools_[index_of( context )];
  if ( index >= pool.size() )
    throw Error( "pool index " + std::to_string( index ) + " out of range for context " +
                 std::string( to_string( context ) ) );
  context_ = context;
  index_ = index;
  current_ = pool[index].circuit;
  reference_ = extract_features( current_ );
  t_ = 0;
  active_ = true;
  ++episodes_;
  return observation();
}

Transition CircuitEnv::step( ActionId action )
{
  if ( !active_ )
    throw Error( "step called without an active episode" );
  Transition tr;
  tr.context = context_;
  tr.circuit = origin().name;
  tr.step = t_;
  tr.observation = observation();
  tr.action = action;

  auto next = apply_action( current_, action );
  require_valid( next );
  if ( options_.verify_equivalence )
  {
    auto const v = check_equivalence( origin().circuit, next );
    if ( !v.equivalent() )
      throw Error( "action " + std::string( to_string( action ) ) + " changed the function of '" + origin().name + "'" );
  }
  current_ = std::move( next );
  ++t_;
  tr.done = t_ >= horizon();
  tr.features = extract_features( current_ );
  tr.next_observation = make_observation( tr.features, reference_, context_ );

  if ( tr.done || options_.dense )
  {
    ++oracle_calls_;
    auto const s = oracle_->score( context_, current_, origin() );
    tr.oracle_value = s.value;
    tr.reward = terminal_reward( context_, s.value, options_.alpha );
    tr.success = tr.done && is_success( context_, s.value );
    if ( tr.success )
      tr.adversarial = current_;
  }
  if ( tr.done )
    active_ = false;
  return tr;
}

void CircuitEnv::set_dense( bool dense )
{
  if ( active_ )
    throw Error( "reward mode cannot change during an episode" );
  options_.dense = dense;
}

namespace
{

std::string fmt( double v )
{
  char buf[32];
  std::snprintf( buf, sizeof buf, "%.17g", v );
  return buf;
}

} // namespace

std::string trace_csv_header()
{
  return "episode,step,context,circuit,action,reward,done,oracle_value,success," + features_csv_header();
}

std::string trace_csv_row( std::uint64_t episode, Transition const& t )
{
  std::string row = std::to_string( episode ) + "," + std::to_string( t.step ) + "," + std::string( to_string( t.context ) ) +
                    "," + t.circuit + "," + std::string( to_string( t.action ) ) + "," + fmt( t.reward ) + "," +
                    ( t.done ? "1" : "0" ) + "," + ( t.oracle_value ? fmt( *t.oracle_value ) : "" ) + "," +
                    ( t.success ? "1" : "0" ) + "," + features_csv_row( t.features );
  return row;
}

std::filesystem::path write_snapshot( std::filesystem::path const& dir, std::string const& name, Netlist const& netlist )
{
  std::filesystem::create_directories( dir );
  auto const path = dir / ( name + ".blif" );
  write_text_file( path, write_blif( netlist ) );
  return path;
}

} // namespace netforge
