#include <doctest.h>

#include <netforge/corpus.hpp>
#include <netforge/error.hpp>
#include <netforge/io.hpp>
#include <netforge/ppo.hpp>

#include <cmath>
#include <filesystem>
#include <numeric>

using namespace netforge;

namespace
{

DeskSetup const& desk()
{
  static DeskSetup const d = desk_setup();
  return d;
}

Pools piracy_only()
{
  Pools p;
  p[index_of( Context::Piracy )] = desk().pools[index_of( Context::Piracy )];
  return p;
}

// Policy that picks `a` with probability ~1.
PolicyParams forced( ActionId a )
{
  std::mt19937_64 rng( 1 );
  auto p = make_policy( rng, 8 );
  auto& w = p.policy.params;
  std::fill( w.end() - static_cast<std::ptrdiff_t>( num_actions * 8 + num_actions ), w.end(), 0.0 );
  w[w.size() - num_actions + index_of( a )] = 50.0;
  return p;
}

} // namespace

TEST_CASE( "policy forward" )
{
  std::mt19937_64 rng( 3 );
  auto p = make_policy( rng );
  CHECK( p.policy.num_params() == 17 * 64 + 64 + 64 * 64 + 64 + 64 * 11 + 11 );
  CHECK( p.value.outputs() == 1 );

  Observation obs{};
  obs[0] = 1.0f;
  for ( std::size_t i = 4; i < obs.size(); ++i )
    obs[i] = static_cast<float>( i ) / 10.0f;

  auto const a = forward( p, obs );
  auto const b = forward( p, obs );
  CHECK( a.logits == b.logits );
  CHECK( a.value == b.value );
  CHECK( std::abs( std::accumulate( a.probs.begin(), a.probs.end(), 0.0 ) - 1.0 ) < 1e-9 );

  // zero output layer gives a uniform distribution
  auto z = p;
  std::fill( z.policy.params.end() - ( 64 * 11 + 11 ), z.policy.params.end(), 0.0 );
  for ( auto const q : forward( z, obs ).probs )
    CHECK( q == doctest::Approx( 1.0 / 11.0 ).epsilon( 1e-12 ) );

  for ( int t = 0; t < 50; ++t )
  {
    auto r = make_policy( rng );
    for ( auto& x : obs )
      x = static_cast<float>( std::normal_distribution<double>( 0.0, 3.0 )( rng ) );
    auto const out = forward( r, obs );
    CHECK( std::abs( std::accumulate( out.probs.begin(), out.probs.end(), 0.0 ) - 1.0 ) < 1e-9 );
    for ( auto const q : out.probs )
      CHECK( q >= 0.0 );
  }

  auto bad = p;
  bad.value.params[0] = std::nan( "" );
  CHECK_THROWS_AS( forward( bad, obs ), NumericError );
}

TEST_CASE( "gae" )
{
  RolloutBuffer b;
  b.steps.push_back( { 0, {}, 0, 0.0, 0.7, 0.2, true } );
  b.last_values = { 123.0 };
  gae( b, 0.99, 0.95 );
  CHECK( b.advantages[0] == doctest::Approx( 0.5 ) );
  CHECK( b.returns[0] == doctest::Approx( 0.7 ) );

  // lambda = 0: one-step TD errors, bootstrapping the cut tail
  RolloutBuffer td;
  td.steps = { { 0, {}, 0, 0.0, 0.0, 0.5, false }, { 0, {}, 0, 0.0, 1.0, 0.3, false } };
  td.last_values = { 0.8 };
  gae( td, 0.9, 0.0 );
  CHECK( td.advantages[0] == doctest::Approx( 0.0 + 0.9 * 0.3 - 0.5 ) );
  CHECK( td.advantages[1] == doctest::Approx( 1.0 + 0.9 * 0.8 - 0.3 ) );

  // lambda = gamma = 1: Monte Carlo return minus value
  RolloutBuffer mc;
  mc.steps = { { 0, {}, 0, 0.0, 1.0, 0.1, false }, { 0, {}, 0, 0.0, 2.0, 0.2, false }, { 0, {}, 0, 0.0, 3.0, 0.4, true },
               { 0, {}, 0, 0.0, 5.0, 0.5, false } };
  mc.last_values = { 2.0 };
  gae( mc, 1.0, 1.0 );
  CHECK( mc.advantages[0] == doctest::Approx( 6.0 - 0.1 ) );
  CHECK( mc.advantages[1] == doctest::Approx( 5.0 - 0.2 ) );
  CHECK( mc.advantages[2] == doctest::Approx( 3.0 - 0.4 ) );
  CHECK( mc.advantages[3] == doctest::Approx( 7.0 - 0.5 ) );

  // interleaved workers are independent streams
  RolloutBuffer two;
  two.steps = { { 0, {}, 0, 0.0, 1.0, 0.0, false }, { 1, {}, 0, 0.0, 10.0, 0.0, true }, { 0, {}, 0, 0.0, 2.0, 0.0, true } };
  two.last_values = { 0.0, 0.0 };
  gae( two, 1.0, 1.0 );
  CHECK( two.advantages[0] == doctest::Approx( 3.0 ) );
  CHECK( two.advantages[1] == doctest::Approx( 10.0 ) );

  std::vector<double> v = { 1.0, 2.0, 3.0, 4.0 };
  normalize( v );
  CHECK( std::accumulate( v.begin(), v.end(), 0.0 ) == doctest::Approx( 0.0 ).epsilon( 1e-12 ) );
}

TEST_CASE( "clipped surrogate" )
{
  PolicyParams p{ Mlp( { 1, 2 } ), Mlp( { 1, 1 } ) };
  TrainConfig cfg;
  cfg.value_coef = 0.0;
  Sample s;
  s.obs = { 0.0 };
  s.action = 0;
  s.advantage = 1.0;
  // both logits 0, so logp = log 0.5; ratio 1.5
  s.old_logp = std::log( 0.5 ) - std::log( 1.5 );
  std::vector<Sample> batch = { s };
  auto const L = ppo_loss( p, batch, cfg );
  CHECK( -L.policy == doctest::Approx( 1.2 ) );
  CHECK( L.clip_fraction == 1.0 );

  // the clipped branch carries no policy gradient
  std::vector<double> gp( p.policy.num_params(), 0.0 ), gv( p.value.num_params(), 0.0 );
  ppo_loss( p, batch, cfg, gp, gv );
  for ( auto const g : gp )
    CHECK( g == 0.0 );

  batch[0].advantage = 0.0;
  std::fill( gp.begin(), gp.end(), 0.0 );
  auto const Z = ppo_loss( p, batch, cfg, gp, gv );
  CHECK( Z.policy == 0.0 );
  for ( auto const g : gp )
    CHECK( g == 0.0 );
}

TEST_CASE( "gradients match finite differences" )
{
  double worst = 0.0;
  for ( std::uint64_t t = 0; t < 100; ++t )
    worst = std::max( worst, gradient_check( t ) );
  CHECK( worst < 1e-4 );
}

TEST_CASE( "config validation" )
{
  TrainConfig c;
  CHECK( c.problems().empty() );
  c.minibatch_size = 5;
  c.clip_ratio = 1.5;
  c.learning_rate = 0.0;
  CHECK( c.problems().size() == 3 );
  CHECK_THROWS_AS( init_train_state( c ), Error );
  CHECK( TrainConfig::from_json( TrainConfig{}.to_json() ) == TrainConfig{} );
}

TEST_CASE( "rollout" )
{
  auto o = std::make_shared<BuiltinOracle>( desk().models );
  std::vector<CircuitEnv> envs;
  envs.emplace_back( piracy_only(), o, EnvOptions{}, 5 );
  std::mt19937_64 rng( 5 );
  std::vector<Transition> trans;
  auto const buf = rollout( forced( ActionId::Noop ), envs, 32, rng, &trans );
  REQUIRE( buf.steps.size() == 32 );
  REQUIRE( trans.size() == 32 );
  std::size_t done = 0;
  for ( std::size_t i = 0; i < 32; ++i )
  {
    CHECK( buf.steps[i].action == index_of( ActionId::Noop ) );
    CHECK( buf.steps[i].reward == 0.0 );
    done += buf.steps[i].done;
  }
  CHECK( done == 6 );
  CHECK( envs[0].active() );

  auto const again = [&] {
    std::vector<CircuitEnv> e;
    e.emplace_back( desk().pools, o, EnvOptions{}, 8 );
    std::mt19937_64 r( 8 );
    std::mt19937_64 pr( 2 );
    return rollout( make_policy( pr ), e, 32, r );
  };
  auto const x = again();
  auto const y = again();
  for ( std::size_t i = 0; i < 32; ++i )
  {
    CHECK( x.steps[i].action == y.steps[i].action );
    CHECK( x.steps[i].reward == y.steps[i].reward );
    CHECK( x.steps[i].logp == y.steps[i].logp );
  }
}

TEST_CASE( "training" )
{
  auto o = std::make_shared<BuiltinOracle>( desk().models );
  TrainConfig cfg;
  cfg.seed = 4;
  cfg.total_steps = 0;
  auto s0 = init_train_state( cfg );
  auto const p0 = s0.params;
  {
    std::vector<CircuitEnv> envs;
    envs.emplace_back( desk().pools, o, EnvOptions{}, 4 );
    train( s0, envs );
  }
  CHECK( s0.params == p0 );
  CHECK( s0.steps == 0 );

  auto run = [&] {
    TrainConfig c = cfg;
    c.total_steps = 256;
    auto s = init_train_state( c );
    std::vector<CircuitEnv> envs;
    envs.emplace_back( desk().pools, o, EnvOptions{}, 4 );
    std::string log;
    train( s, envs, [&]( RolloutLog const& l, std::vector<Transition> const& ) { log += train_log_row( l ) + "\n"; } );
    return std::make_pair( s, log );
  };
  auto const [a, la] = run();
  auto const [b, lb] = run();
  CHECK( a.steps == 256 );
  CHECK( a.rollouts == 8 );
  CHECK( a.params != p0 );
  CHECK( checkpoint_json( a ).dump() == checkpoint_json( b ).dump() );
  CHECK( la == lb );
  CHECK( std::count( la.begin(), la.end(), '\n' ) == 8 );
  CHECK( a.oracle_calls == a.episodes );

  // resume continues the step count
  auto r = checkpoint_from_json( checkpoint_json( a ) );
  CHECK( r == a );
  r.config.total_steps = 320;
  std::vector<CircuitEnv> envs;
  envs.emplace_back( desk().pools, o, EnvOptions{}, 9 );
  std::vector<std::uint64_t> steps;
  train( r, envs, [&]( RolloutLog const& l, std::vector<Transition> const& ) { steps.push_back( l.step ); } );
  CHECK( steps == std::vector<std::uint64_t>{ 288, 320 } );
}

TEST_CASE( "checkpoint files" )
{
  auto const dir = std::filesystem::temp_directory_path() / "netforge_ckpt_test";
  std::filesystem::create_directories( dir );
  auto const s = init_train_state( TrainConfig{} );
  save_checkpoint( dir / "a.json", s );
  CHECK( load_checkpoint( dir / "a.json" ) == s );

  auto j = checkpoint_json( s );
  j["version"] = 99;
  CHECK_THROWS_AS( checkpoint_from_json( j ), ParseError );
  j = checkpoint_json( s );
  j["policy"]["params"].erase( 0 );
  CHECK_THROWS_AS( checkpoint_from_json( j ), ParseError );
  write_text_file( dir / "bad.json", "{ not json" );
  CHECK_THROWS_AS( load_checkpoint( dir / "bad.json" ), ParseError );
  std::filesystem::remove_all( dir );
}

TEST_CASE( "attack" )
{
  auto o = std::make_shared<BuiltinOracle>( desk().models );
  auto const& target = desk().pools[index_of( Context::Piracy )][0];

  auto const none = attack( forced( ActionId::Noop ), target, Context::Piracy, 10, o );
  CHECK( none.episodes.size() == 10 );
  CHECK( none.successes.empty() );

  auto const hit = attack( forced( ActionId::A7 ), target, Context::Piracy, 10, o );
  REQUIRE( hit.successes.size() == 1 );
  CHECK( hit.successes[0].verdict.status == EquivalenceStatus::EquivalentExhaustive );
  CHECK( hit.successes[0].score.value < 0.0 );
  for ( auto const& e : hit.episodes )
  {
    CHECK( e.success );
    CHECK( e.actions.size() == 5 );
  }

  std::mt19937_64 rng( 6 );
  auto const p = make_policy( rng );
  auto const x = attack( p, target, Context::Piracy, 20, o, {}, 3 );
  auto const y = attack( p, target, Context::Piracy, 20, o, {}, 3 );
  REQUIRE( x.successes.size() == y.successes.size() );
  for ( std::size_t i = 0; i < x.successes.size(); ++i )
  {
    CHECK( x.successes[i].hash == y.successes[i].hash );
    for ( std::size_t j = 0; j < i; ++j )
      CHECK( x.successes[i].hash != x.successes[j].hash );
    CHECK( x.successes[i].verdict.equivalent() );
  }
}

namespace
{

// Throws `E` on every `period`-th call.
template<class E>
class FlakyOracle final : public OracleBackend
{
public:
  FlakyOracle( std::shared_ptr<OracleBackend> inner, unsigned period ) : inner_( std::move( inner ) ), period_( period ) {}
  OracleScore score( Context c, Netlist const& n, PoolEntry const& o ) override
  {
    if ( ++calls_ % period_ == 0 )
      throw E( "flaky" );
    return inner_->score( c, n, o );
  }

private:
  std::shared_ptr<OracleBackend> inner_;
  unsigned period_;
  unsigned calls_ = 0;
};

} // namespace

TEST_CASE( "rollout failures" )
{
  auto base = std::make_shared<BuiltinOracle>( desk().models );
  std::mt19937_64 rng( 1 );
  auto const p = make_policy( rng );

  std::vector<CircuitEnv> envs;
  envs.emplace_back( piracy_only(), std::make_shared<FlakyOracle<Error>>( base, 3 ), EnvOptions{}, 1 );
  std::uint64_t failures = 0;
  auto const buf = rollout( p, envs, 32, rng, nullptr, &failures );
  CHECK( buf.steps.size() == 32 );
  CHECK( failures > 0 );
  // the step before each dropped episode's failure closes that episode
  std::size_t done = 0;
  for ( auto const& s : buf.steps )
    done += s.done;
  CHECK( done >= failures );

  std::vector<CircuitEnv> broken;
  broken.emplace_back( piracy_only(), std::make_shared<FlakyOracle<ProtocolError>>( base, 2 ), EnvOptions{}, 1 );
  CHECK_THROWS_AS( rollout( p, broken, 32, rng ), ProtocolError );

  std::vector<CircuitEnv> slow;
  slow.emplace_back( piracy_only(), std::make_shared<FlakyOracle<TimeoutError>>( base, 1 ), EnvOptions{}, 1 );
  auto state = init_train_state( TrainConfig{} );
  auto const before = state;
  CHECK_THROWS_AS( train( state, slow ), TimeoutError );
  CHECK( state == before );
}
