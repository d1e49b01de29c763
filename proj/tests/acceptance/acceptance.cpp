// Acceptance suite: one PASS/FAIL line per criterion, exit status 0 iff all pass.
// Usage: acceptance [criterion numbers...]

#include <netforge/adapter.hpp>
#include <netforge/corpus.hpp>
#include <netforge/env.hpp>
#include <netforge/equivalence.hpp>
#include <netforge/error.hpp>
#include <netforge/generators.hpp>
#include <netforge/io.hpp>
#include <netforge/oracles.hpp>
#include <netforge/ppo.hpp>
#include <netforge/run.hpp>
#include <netforge/techmap.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace netforge;
namespace fs = std::filesystem;

namespace
{

// Pinned thresholds.
constexpr std::size_t c1_cases = 220;
constexpr double c1_max_seconds = 300.0;
constexpr std::size_t c2_cases = 200;
constexpr double c3_tolerance = 1e-4;
constexpr unsigned c4_episodes = 100;
constexpr double c4_ratio = 5.0;
constexpr std::uint64_t c5_max_steps = 2000;
constexpr double c5_margin = 0.20;
constexpr std::size_t c5_seeds = 5;
constexpr std::size_t c5_eval_episodes = 200;
constexpr double c5_max_seconds = 1800.0;
constexpr std::uint64_t c6_max_steps = 10000;
constexpr std::size_t c6_budget = 50;
constexpr double c6_floor = 0.80;
constexpr std::size_t c7_trials = 100;
constexpr double c7_tolerance = 1e-4;
constexpr double c9_trojan_floor = 0.9;
constexpr double c9_re_floor = 0.9;
constexpr double c9_kpa_floor = 0.75;
constexpr double c9_unrelated_floor = 0.90;
constexpr std::size_t c10_requests = 100;
constexpr double c10_tolerance = 1e-9;

struct Outcome
{
  bool pass = false;
  std::string detail;
};

std::string num( double v, int digits = 4 )
{
  char buf[64];
  std::snprintf( buf, sizeof buf, "%.*f", digits, v );
  return buf;
}

DeskSetup const& desk()
{
  static DeskSetup const d = desk_setup();
  return d;
}

double seconds_since( std::chrono::steady_clock::time_point t0 )
{
  return std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count();
}

class CountingOracle final : public OracleBackend
{
public:
  explicit CountingOracle( std::shared_ptr<OracleBackend> inner ) : inner_( std::move( inner ) ) {}
  OracleScore score( Context c, Netlist const& n, PoolEntry const& o ) override
  {
    ++calls;
    return inner_->score( c, n, o );
  }
  std::uint64_t calls = 0;

private:
  std::shared_ptr<OracleBackend> inner_;
};

Outcome functionality_preservation()
{
  auto const t0 = std::chrono::steady_clock::now();
  auto const corpus = desk_corpus();
  std::size_t ok = 0, total = 0;
  std::string first_failure;
  for ( auto const& c : corpus )
  {
    for ( std::size_t a = 0; a < num_actions; ++a )
    {
      ++total;
      auto const action = action_from_index( a );
      auto const v = check_equivalence( c.netlist, apply_action( c.netlist, action ) );
      if ( v.status == EquivalenceStatus::EquivalentExhaustive )
        ++ok;
      else if ( first_failure.empty() )
        first_failure = " first failure " + c.name + "/" + std::string( to_string( action ) );
    }
  }
  double const secs = seconds_since( t0 );
  return { ok == c1_cases && total == c1_cases && secs <= c1_max_seconds,
           std::to_string( ok ) + "/" + std::to_string( total ) + " EQUIVALENT_EXHAUSTIVE in " + num( secs, 1 ) +
               " s" + first_failure };
}

Outcome allowlist_soundness()
{
  auto const corpus = desk_corpus();
  std::size_t ok = 0, total = 0;
  for ( auto const& c : corpus )
  {
    for ( std::size_t a = 0; a + 1 < num_actions; ++a )
    {
      ++total;
      auto const action = action_from_index( a );
      ok += allowlist_violations( apply_action( c.netlist, action ), action ).empty();
    }
  }
  return { ok == c2_cases && total == c2_cases, std::to_string( ok ) + "/" + std::to_string( total ) + " clean" };
}

Outcome reward_suite()
{
  bool pass = true;
  std::string detail;
  std::array<std::pair<double, double>, 3> const obf = { std::pair{ 0.5, 1.0 }, { 0.55, 0.7788 }, { 1.0, 0.0821 } };
  for ( auto const [v, want] : obf )
  {
    double const got = terminal_reward( Context::Obfuscation, v );
    pass = pass && std::abs( got - want ) <= c3_tolerance;
    detail += "obf(" + num( v, 2 ) + ")=" + num( got ) + " ";
  }
  for ( auto const ctx : { Context::TrojanLoc, Context::ReverseEng } )
  {
    pass = pass && terminal_reward( ctx, 0.0 ) == 1.0 && terminal_reward( ctx, 0.4 ) == 0.6 &&
           terminal_reward( ctx, 1.0 ) == 0.0;
  }
  detail += "linear(0,0.4,1)=" + num( terminal_reward( Context::TrojanLoc, 0.0 ), 1 ) + "," +
            num( terminal_reward( Context::TrojanLoc, 0.4 ), 1 ) + "," +
            num( terminal_reward( Context::TrojanLoc, 1.0 ), 1 ) + " ";
  for ( double const alpha : { 1.0, 0.5 } )
  {
    pass = pass && terminal_reward( Context::Piracy, -0.2, alpha ) == alpha &&
           terminal_reward( Context::Piracy, 0.0, alpha ) == 0.0 && terminal_reward( Context::Piracy, 0.2, alpha ) == 0.0;
  }
  detail += "piracy(-0.2,0,0.2)=" + num( terminal_reward( Context::Piracy, -0.2 ), 1 ) + "," +
            num( terminal_reward( Context::Piracy, 0.0 ), 1 ) + "," + num( terminal_reward( Context::Piracy, 0.2 ), 1 );
  return { pass, detail };
}

Outcome sparse_reward()
{
  std::array<std::uint64_t, 2> calls{};
  for ( int dense = 0; dense < 2; ++dense )
  {
    auto counter = std::make_shared<CountingOracle>( std::make_shared<BuiltinOracle>( desk().models ) );
    Pools pools;
    pools[index_of( Context::Piracy )] = desk().pools[index_of( Context::Piracy )];
    EnvOptions opt;
    opt.dense = dense == 1;
    CircuitEnv env( pools, counter, opt, 11 );
    std::mt19937_64 rng( 12 );
    for ( unsigned e = 0; e < c4_episodes; ++e )
    {
      env.reset();
      while ( env.active() )
        env.step( action_from_index( std::uniform_int_distribution<std::size_t>( 0, num_actions - 1 )( rng ) ) );
    }
    calls[dense] = counter->calls;
  }
  double const ratio = static_cast<double>( calls[1] ) / static_cast<double>( calls[0] );
  return { calls[0] == c4_episodes && calls[1] == 5 * c4_episodes && ratio == c4_ratio,
           "sparse " + std::to_string( calls[0] ) + " calls, dense " + std::to_string( calls[1] ) + " calls over " +
               std::to_string( c4_episodes ) + " episodes (T=5), ratio " + num( ratio, 2 ) };
}

// Success-episode rate of `pick` over round-robin pool episodes.
double success_rate( CircuitEnv& env, std::function<ActionId( Observation const& )> const& pick )
{
  std::size_t hits = 0;
  auto const n = env.pools()[index_of( Context::Piracy )].size();
  for ( std::size_t e = 0; e < c5_eval_episodes; ++e )
  {
    env.reset( Context::Piracy, e % n );
    Transition last;
    while ( env.active() )
      last = env.step( pick( env.observation() ) );
    hits += last.success;
  }
  return static_cast<double>( hits ) / static_cast<double>( c5_eval_episodes );
}

Outcome learning()
{
  auto const t0 = std::chrono::steady_clock::now();
  auto oracle = std::make_shared<BuiltinOracle>( desk().models );
  Pools pools;
  pools[index_of( Context::Piracy )] = desk().pools[index_of( Context::Piracy )];
  double trained_sum = 0.0, random_sum = 0.0;
  std::string per_seed;
  for ( std::uint64_t seed = 1; seed <= c5_seeds; ++seed )
  {
    TrainConfig cfg;
    cfg.seed = seed;
    cfg.total_steps = c5_max_steps;
    auto state = init_train_state( cfg );
    std::vector<CircuitEnv> envs;
    envs.emplace_back( pools, oracle, EnvOptions{}, derive_seed( seed, 0 ) );
    train( state, envs );

    CircuitEnv eval_a( pools, oracle, EnvOptions{}, derive_seed( seed, 1 ) );
    std::mt19937_64 rng_a( derive_seed( seed, 2 ) );
    double const trained = success_rate( eval_a, [&]( Observation const& obs ) {
      return action_from_index( sample_action( forward( state.params, obs ), rng_a ) );
    } );
    CircuitEnv eval_b( pools, oracle, EnvOptions{}, derive_seed( seed, 1 ) );
    std::mt19937_64 rng_b( derive_seed( seed, 2 ) );
    double const random = success_rate( eval_b, [&]( Observation const& ) {
      return action_from_index( std::uniform_int_distribution<std::size_t>( 0, num_actions - 1 )( rng_b ) );
    } );
    trained_sum += trained;
    random_sum += random;
    per_seed += " " + num( trained, 3 ) + "/" + num( random, 3 );
  }
  double const trained = trained_sum / c5_seeds, random = random_sum / c5_seeds;
  double const secs = seconds_since( t0 );
  return { trained >= random + c5_margin && secs <= c5_max_seconds,
           "trained " + num( trained, 3 ) + " vs random " + num( random, 3 ) + " (+" +
               num( 100.0 * ( trained - random ), 1 ) + " pp) after " + std::to_string( c5_max_steps ) +
               " steps, seeds 1-5 trained/random:" + per_seed + ", " + num( secs, 1 ) + " s" };
}

Outcome multi_task()
{
  auto const t0 = std::chrono::steady_clock::now();
  auto oracle = std::make_shared<BuiltinOracle>( desk().models );
  TrainConfig cfg;
  cfg.seed = 1;
  cfg.total_steps = c6_max_steps;
  auto state = init_train_state( cfg );
  std::vector<CircuitEnv> envs;
  envs.emplace_back( desk().pools, oracle, EnvOptions{}, derive_seed( 1, 0 ) );
  train( state, envs );

  bool pass = true;
  std::string detail;
  for ( auto const ctx : all_contexts )
  {
    auto const& pool = desk().pools[index_of( ctx )];
    std::size_t covered = 0;
    for ( std::size_t i = 0; i < pool.size(); ++i )
    {
      auto const r = attack( state.params, pool[i], ctx, c6_budget, oracle, {}, derive_seed( 1, index_of( ctx ), i ) );
      bool const verified = !r.successes.empty() &&
                            std::all_of( r.successes.begin(), r.successes.end(),
                                         [&]( AdversarialCircuit const& s ) { return s.verdict.equivalent(); } );
      covered += verified;
    }
    double const rate = static_cast<double>( covered ) / static_cast<double>( pool.size() );
    pass = pass && rate >= c6_floor;
    detail += std::string( to_string( ctx ) ) + " " + std::to_string( covered ) + "/" + std::to_string( pool.size() ) + ", ";
  }
  detail += "policy trained " + std::to_string( state.steps ) + " steps, budget " + std::to_string( c6_budget ) + ", " +
            num( seconds_since( t0 ), 1 ) + " s";
  return { pass, detail };
}

Outcome gradient_correctness()
{
  double worst = 0.0;
  for ( std::uint64_t t = 0; t < c7_trials; ++t )
    worst = std::max( worst, gradient_check( 1000 + t ) );
  return { worst < c7_tolerance, "max relative error " + std::to_string( worst ) + " over " + std::to_string( c7_trials ) + " trials" };
}

int run_cli( std::string const& args )
{
  std::string const cmd = "'" NETFORGE_BIN "' " + args + " > /dev/null 2>&1";
  int const st = std::system( cmd.c_str() );
  return st;
}

std::string slurp( fs::path const& p )
{
  return read_text_file( p );
}

Outcome determinism()
{
  auto const dir = fs::temp_directory_path() / "netforge_acceptance_det";
  fs::remove_all( dir );
  fs::create_directories( dir );
  write_text_file( dir / "run.ini", "[run]\nseed = 5\ntrace = true\n[corpus]\npiracy = desk\ntrojan_loc = desk\n"
                                    "reverse_eng = desk\nobfuscation = desk\n[ppo]\ntotal_steps = 640\nworkers = 1\n" );
  for ( auto const* out : { "a", "b" } )
  {
    if ( run_cli( "train '" + ( dir / "run.ini" ).string() + "' -o '" + ( dir / out ).string() + "'" ) != 0 )
      return { false, "train exited with an error" };
  }
  std::size_t same = 0, total = 0;
  for ( auto const& f : fs::recursive_directory_iterator( dir / "a" ) )
  {
    if ( !f.is_regular_file() || f.path().filename() == "manifest.json" )
      continue;
    ++total;
    auto const rel = fs::relative( f.path(), dir / "a" );
    same += fs::exists( dir / "b" / rel ) && slurp( f.path() ) == slurp( dir / "b" / rel );
  }
  bool const core = fs::exists( dir / "a" / "checkpoint.json" ) && fs::exists( dir / "a" / "train_log.csv" ) &&
                    fs::exists( dir / "a" / "queries.csv" );
  fs::remove_all( dir );
  return { core && same == total && total >= 4,
           std::to_string( same ) + "/" + std::to_string( total ) +
               " output files byte-identical (checkpoint, logs, trace, snapshots)" };
}

Outcome oracle_sanity()
{
  bool pass = true;
  std::string detail;
  double trojan = 1.0, re = 1.0, kpa = 1.0;
  for ( std::uint64_t s = 0; s < 5; ++s )
  {
    auto host = gen_re_blocks( { 4 }, { BlockKind::Add, BlockKind::Mul }, s ).netlist;
    auto const t = gen_trojan( host, 4, s );
    auto const tm = train_node_oracle( { { t.netlist, t.truth } }, 2, NodeModel::Mode::Majority );
    trojan = std::min( trojan, trojan_loc_score( t.netlist, t.truth, tm ).value );

    auto const r = gen_re_blocks( { 4 }, { BlockKind::Add, BlockKind::Sub, BlockKind::Cmp, BlockKind::Mul, BlockKind::Ctrl }, s );
    auto const rm = train_node_oracle( { { r.netlist, r.truth } } );
    re = std::min( re, re_accuracy( r.netlist, r.truth, rm ).value );

    auto const o = gen_obfuscated( c17_circuit(), 4, s );
    auto const km = train_key_oracle( { { o.netlist, o.key_gates } } );
    kpa = std::min( kpa, key_prediction_accuracy( o.netlist, o.key_gates, km ).value );
  }
  pass = trojan >= c9_trojan_floor && re >= c9_re_floor && kpa >= c9_kpa_floor;
  detail += "self-fit min over 5 seeds: trojan " + num( trojan, 3 ) + ", RE " + num( re, 3 ) + ", KPA " + num( kpa, 3 );

  auto const corpus = desk_corpus();
  std::size_t identical = 0, below = 0, pairs = 0;
  for ( auto const& a : corpus )
  {
    identical += std::abs( piracy_score( a.netlist, a.netlist ).value - ( 1.0 - default_tau ) ) < 1e-12;
    for ( auto const& b : corpus )
    {
      if ( &a == &b )
        continue;
      ++pairs;
      below += piracy_score( a.netlist, b.netlist ).value < 0.0;
    }
  }
  double const frac = static_cast<double>( below ) / static_cast<double>( pairs );
  pass = pass && identical == corpus.size() && frac >= c9_unrelated_floor;
  detail += "; piracy(x,x)=1-tau for " + std::to_string( identical ) + "/" + std::to_string( corpus.size() ) +
            "; unrelated pairs < 0: " + std::to_string( below ) + "/" + std::to_string( pairs ) + " (" + num( 100 * frac, 1 ) + "%)";
  return { pass, detail };
}

Outcome protocol_conformance()
{
  AdapterProcess adapter( { NETFORGE_BIN, "protocol-serve" }, std::chrono::seconds( 60 ) );
  std::mt19937_64 rng( 2024 );
  double worst = 0.0;
  std::size_t answered = 0;
  for ( std::size_t i = 0; i < c10_requests; ++i )
  {
    auto const ctx = all_contexts[rng() % num_contexts];
    auto const& pool = desk().pools[index_of( ctx )];
    auto const& origin = pool[rng() % pool.size()];
    auto candidate = origin.circuit;
    for ( std::size_t k = rng() % 4; k > 0; --k )
      candidate = apply_action( candidate, action_from_index( rng() % num_actions ) );
    auto const request = make_request( ctx, candidate, origin );
    auto const remote = adapter.query( request );
    auto const local = score_request( request, desk().models );
    worst = std::max( worst, std::abs( remote.value - local.value ) );
    answered += remote.context == ctx && remote.metric == local.metric;
  }

  // malformed or out-of-range responses must be refused
  std::size_t rejected = 0;
  std::vector<std::pair<std::string, Context>> const bad = {
      { "not json", Context::Piracy },
      { R"({"id":7})", Context::Piracy },
      { R"({"id":8,"value":0.1})", Context::Piracy },
      { R"({"id":7,"value":"0.1"})", Context::Piracy },
      { R"({"id":7,"value":1.3})", Context::Obfuscation },
      { R"({"id":7,"value":-0.1})", Context::TrojanLoc },
      { R"({"id":7,"value":1.5})", Context::Piracy },
      { R"({"id":7,"error":"model crashed"})", Context::ReverseEng } };
  for ( auto const& [line, ctx] : bad )
  {
    try
    {
      decode_response( line, 7, ctx );
    }
    catch ( ProtocolError const& )
    {
      ++rejected;
    }
    catch ( InterfaceError const& )
    {
      ++rejected;
    }
  }
  bool garbage_rejected = false;
  try
  {
    AdapterProcess liar( { "/bin/sh", "-c", "while read l; do echo '{\"id\": 1, \"value\": 7}'; done" },
                         std::chrono::seconds( 10 ) );
    liar.query( make_request( Context::Piracy, desk().pools[0][0].circuit, desk().pools[0][0] ) );
  }
  catch ( Error const& )
  {
    garbage_rejected = true;
  }
  bool const pass = answered == c10_requests && worst <= c10_tolerance && rejected == bad.size() && garbage_rejected;
  return { pass, std::to_string( answered ) + "/" + std::to_string( c10_requests ) + " requests, max |diff| " +
                     std::to_string( worst ) + "; " + std::to_string( rejected ) + "/" + std::to_string( bad.size() ) +
                     " malformed responses rejected" + ( garbage_rejected ? ", bad adapter rejected" : "" ) };
}

} // namespace

int main( int argc, char** argv )
{
  std::vector<std::pair<std::string, std::function<Outcome()>>> const criteria = {
      { "functionality preservation", functionality_preservation },
      { "allowlist soundness", allowlist_soundness },
      { "reward functions", reward_suite },
      { "sparse reward oracle calls", sparse_reward },
      { "piracy learning vs random", learning },
      { "multi-task attack coverage", multi_task },
      { "gradient correctness", gradient_correctness },
      { "training determinism", determinism },
      { "oracle sanity", oracle_sanity },
      { "protocol conformance", protocol_conformance } };

  std::set<std::size_t> only;
  for ( int i = 1; i < argc; ++i )
    only.insert( static_cast<std::size_t>( std::atoi( argv[i] ) ) );

  bool all = true;
  for ( std::size_t i = 0; i < criteria.size(); ++i )
  {
    if ( !only.empty() && !only.count( i + 1 ) )
      continue;
    Outcome o;
    try
    {
      o = criteria[i].second();
    }
    catch ( std::exception const& e )
    {
      o = { false, std::string( "exception: " ) + e.what() };
    }
    all = all && o.pass;
    std::cout << ( o.pass ? "PASS" : "FAIL" ) << " [" << i + 1 << "] " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return all ? 0 : 1;
}
