#include <netforge/corpus.hpp>
#include <netforge/env.hpp>
#include <netforge/equivalence.hpp>
#include <netforge/error.hpp>
#include <netforge/features.hpp>
#include <netforge/generators.hpp>
#include <netforge/io.hpp>
#include <netforge/ppo.hpp>
#include <netforge/run.hpp>
#include <netforge/techmap.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

using namespace netforge;
using nlohmann::json;
namespace fs = std::filesystem;

namespace
{

std::vector<std::string> g_args;

std::string fmt( double v )
{
  char buf[32];
  std::snprintf( buf, sizeof buf, "%.17g", v );
  return buf;
}

Context parse_context( std::string const& s )
{
  auto c = context_from_string( s );
  if ( !c )
    throw UsageError( "unknown context '" + s + "' (piracy, trojan_loc, reverse_eng, obfuscation)" );
  return *c;
}

Netlist read_input( fs::path const& path )
{
  if ( !fs::exists( path ) )
    throw UsageError( "missing file '" + path.string() + "'" );
  try
  {
    return read_netlist_file( path );
  }
  catch ( DesignRuleError const& )
  {
    throw;
  }
  catch ( Error const& e )
  {
    throw UsageError( "'" + path.string() + "': " + e.what() );
  }
}

std::string counterexample_text( EquivalenceVerdict const& v )
{
  std::string s;
  for ( std::size_t i = 0; i < v.input_names.size() && i < v.counterexample.size(); ++i )
    s += ( i ? " " : "" ) + v.input_names[i] + "=" + ( v.counterexample[i] ? "1" : "0" );
  return s;
}

void write_json( fs::path const& path, json const& j )
{
  write_text_file( path, j.dump( 1 ) + "\n" );
}

// ---------------------------------------------------------------- gen

struct GenOptions
{
  std::string kind;
  std::string host;
  unsigned trigger_width = 4;
  unsigned keys = 4;
  std::vector<unsigned> widths = { 4 };
  std::vector<std::string> kinds = { "add" };
  std::string name;
  std::string out = ".";
  std::string model_out;
  std::optional<std::uint64_t> seed;
};

int cmd_gen( GenOptions const& o )
{
  auto const seed = resolve_seed( o.seed, 0 );
  fs::path const out( o.out );
  std::vector<std::string> files;
  json extra = { { "kind", o.kind } };

  if ( o.kind == "desk" )
  {
    auto const d = desk_setup();
    for ( auto const ctx : all_contexts )
    {
      for ( auto const& e : d.pools[index_of( ctx )] )
      {
        save_pool_entry( out / to_string( ctx ), e, ctx );
        files.push_back( ( fs::path( to_string( ctx ) ) / ( e.name + ".blif" ) ).string() );
      }
    }
    write_json( out / "models" / "trojan.json", d.models.trojan->to_json() );
    write_json( out / "models" / "re.json", d.models.reverse_eng->to_json() );
    write_json( out / "models" / "key.json", d.models.key->to_json() );
    extra["files"] = files;
    write_manifest( out, "gen", g_args, seed, extra );
    std::cout << "wrote " << files.size() << " circuits and 3 models to " << out.string() << "\n";
    return 0;
  }

  if ( o.kind == "re-blocks" )
  {
    std::vector<BlockKind> kinds;
    for ( auto const& k : o.kinds )
    {
      std::string upper = k;
      std::transform( upper.begin(), upper.end(), upper.begin(), ::toupper );
      auto const b = block_kind_from_string( upper );
      if ( !b )
        throw UsageError( "unknown block kind '" + k + "' (add, sub, cmp, mul, ctrl)" );
      kinds.push_back( *b );
    }
    auto inst = gen_re_blocks( o.widths, kinds, seed );
    std::string const name = o.name.empty() ? "re_blocks" : o.name;
    inst.netlist.set_name( name );
    PoolEntry e{ name, inst.netlist, {}, {} };
    save_pool_entry( out, e, Context::ReverseEng );
    files = { name + ".blif", name + ".truth.json" };
    if ( !o.model_out.empty() )
      write_json( o.model_out, train_node_oracle( { { inst.netlist, inst.truth } }, 2, NodeModel::Mode::Centroid ).to_json() );
  }
  else
  {
    if ( o.host.empty() )
      throw UsageError( "gen " + o.kind + " needs a host circuit" );
    auto const host = read_input( o.host );
    auto const stem = fs::path( o.host ).stem().string();
    if ( o.kind == "trojan" )
    {
      auto inst = gen_trojan( host, o.trigger_width, seed );
      std::string const name = o.name.empty() ? stem + "_trojan" : o.name;
      PoolEntry e{ name, inst.netlist, {}, {} };
      save_pool_entry( out, e, Context::TrojanLoc );
      auto sidecar = truth_sidecar( Context::TrojanLoc, inst.netlist, inst.truth );
      sidecar["trigger_inputs"] = inst.trigger_inputs;
      sidecar["trigger_pattern"] = json::array();
      for ( bool const b : inst.trigger_pattern )
        sidecar["trigger_pattern"].push_back( b ? 1 : 0 );
      sidecar["payload_output"] = inst.payload_output;
      write_json( out / ( name + ".truth.json" ), sidecar );
      files = { name + ".blif", name + ".truth.json" };
      if ( !o.model_out.empty() )
        write_json( o.model_out, train_node_oracle( { { inst.netlist, inst.truth } }, 2, NodeModel::Mode::Majority ).to_json() );
    }
    else if ( o.kind == "obfuscate" )
    {
      auto inst = gen_obfuscated( host, o.keys, seed );
      std::string const name = o.name.empty() ? stem + "_obf" : o.name;
      PoolEntry e{ name, inst.netlist, inst.key_inputs, inst.key };
      save_pool_entry( out, e, Context::Obfuscation );
      files = { name + ".blif", name + ".key.json" };
      if ( !o.model_out.empty() )
        write_json( o.model_out, train_key_oracle( { { inst.netlist, inst.key_gates } } ).to_json() );
    }
    else
      throw UsageError( "unknown generator '" + o.kind + "' (trojan, obfuscate, re-blocks, desk)" );
  }
  extra["files"] = files;
  if ( !o.model_out.empty() )
    extra["model"] = o.model_out;
  write_manifest( out, "gen", g_args, seed, extra );
  for ( auto const& f : files )
    std::cout << ( out / f ).string() << "\n";
  if ( !o.model_out.empty() )
    std::cout << o.model_out << "\n";
  return 0;
}

// ---------------------------------------------------------------- train

struct TrainOptions
{
  std::string config;
  std::string out;
  std::string resume;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> total_steps;
  std::optional<std::size_t> workers;
};

int cmd_train( TrainOptions const& o )
{
  auto cfg = load_run_config( o.config );
  cfg.seed = resolve_seed( o.seed, cfg.seed );
  cfg.train.seed = cfg.seed;
  if ( !o.out.empty() )
    cfg.output = o.out;
  if ( o.total_steps )
    cfg.train.total_steps = *o.total_steps;
  if ( o.workers )
    cfg.train.workers = *o.workers;
  if ( auto const p = cfg.train.problems(); !p.empty() )
  {
    std::string msg = "invalid configuration:";
    for ( auto const& s : p )
      msg += "\n  [ppo] " + s;
    throw UsageError( msg );
  }

  auto const pools = load_pools( cfg );
  auto oracle = make_oracle( cfg );

  TrainState state;
  bool const resuming = !o.resume.empty();
  if ( resuming )
  {
    if ( !fs::exists( o.resume ) )
      throw UsageError( "missing checkpoint '" + o.resume + "'" );
    try
    {
      state = load_checkpoint( o.resume );
    }
    catch ( ParseError const& e )
    {
      throw UsageError( "corrupt checkpoint '" + o.resume + "': " + e.what() );
    }
    if ( cfg.train.total_steps < state.steps )
      throw UsageError( "total_steps " + std::to_string( cfg.train.total_steps ) + " is below the checkpoint's " +
                        std::to_string( state.steps ) );
    state.config.total_steps = cfg.train.total_steps;
    state.config.workers = cfg.train.workers;
  }
  else
    state = init_train_state( cfg.train );

  std::vector<CircuitEnv> envs;
  for ( std::size_t w = 0; w < state.config.workers; ++w )
    envs.emplace_back( pools, oracle, cfg.env, derive_seed( state.config.seed, w, state.rollouts ) );

  fs::path const dir = cfg.output;
  fs::create_directories( dir );
  auto const mode = resuming ? std::ios::app : std::ios::trunc;
  auto open_log = [&]( fs::path const& p, std::string const& header ) {
    bool const fresh = !resuming || !fs::exists( p );
    std::ofstream f( p, std::ios::binary | ( fresh ? std::ios::trunc : mode ) );
    if ( !f )
      throw UsageError( "cannot write '" + p.string() + "'" );
    if ( fresh )
      f << header << "\n";
    return f;
  };
  auto train_log = open_log( dir / "train_log.csv", train_log_header() );
  auto queries_log = open_log( dir / "queries.csv", queries_log_header() );
  auto successes_log = open_log( dir / "successes.csv", "step,context,circuit,oracle_value,file" );
  std::optional<std::ofstream> trace;
  if ( cfg.trace )
    trace.emplace( open_log( dir / "trace.csv", trace_csv_header() ) );

  std::set<std::uint64_t> seen;
  std::uint64_t episode = state.episodes;
  std::uint64_t step = state.steps;
  auto on_rollout = [&]( RolloutLog const& row, std::vector<Transition> const& transitions ) {
    for ( auto const& t : transitions )
    {
      ++step;
      if ( trace )
        *trace << trace_csv_row( episode, t ) << "\n";
      if ( t.done )
        ++episode;
      if ( t.adversarial )
      {
        auto const h = netlist_hash( *t.adversarial );
        if ( seen.insert( h ).second )
        {
          char name[64];
          std::snprintf( name, sizeof name, "%016llx", static_cast<unsigned long long>( h ) );
          auto const file = fs::path( "successes" ) / to_string( t.context ) / ( t.circuit + "_" + name + ".blif" );
          write_snapshot( dir / file.parent_path(), file.stem().string(), *t.adversarial );
          successes_log << step << "," << to_string( t.context ) << "," << t.circuit << ","
                        << fmt( t.oracle_value.value_or( 0.0 ) ) << "," << file.string() << "\n";
        }
      }
    }
    train_log << train_log_row( row ) << "\n";
    queries_log << queries_log_row( row ) << "\n";
    train_log.flush();
    queries_log.flush();
    std::cerr << "step " << row.step << " rollout " << row.rollout << " successes " << row.total_successes << "/"
              << row.total_episodes << "\n";
  };
  try
  {
    train( state, envs, on_rollout );
  }
  catch ( ... )
  {
    // state still holds the last completed rollout
    save_checkpoint( dir / "checkpoint.json", state );
    std::cerr << "netforge: training stopped at step " << state.steps << "; checkpoint "
              << ( dir / "checkpoint.json" ).string() << " can be resumed\n";
    throw;
  }

  save_checkpoint( dir / "checkpoint.json", state );
  json extra = { { "config", o.config },
                 { "resume", o.resume },
                 { "train", state.config.to_json() },
                 { "pool_sizes", json::array() } };
  for ( auto const ctx : all_contexts )
    extra["pool_sizes"].push_back( pools[index_of( ctx )].size() );
  write_manifest( dir, "train", g_args, cfg.seed, extra );
  std::cout << "trained " << state.steps << " steps, " << state.episodes << " episodes, " << state.successes
            << " successes; checkpoint " << ( dir / "checkpoint.json" ).string() << "\n";
  return 0;
}

// ---------------------------------------------------------------- attack

struct OracleOptions
{
  std::string external;
  double timeout = 120.0;
  double tau = default_tau;
  unsigned wl_depth = 2;
  std::string trojan_model = "desk";
  std::string re_model = "desk";
  std::string key_model = "desk";

  void add( CLI::App* app )
  {
    app->add_option( "--external", external, "Classifier adapter command line (default: built-in surrogates)" );
    app->add_option( "--timeout", timeout, "Adapter timeout in seconds" )->check( CLI::PositiveNumber );
    app->add_option( "--tau", tau, "Piracy threshold" )->check( CLI::Range( -1.0, 1.0 ) );
    app->add_option( "--wl-depth", wl_depth, "WL refinement depth for piracy" );
    app->add_option( "--trojan-model", trojan_model, "desk, none or a model JSON file" );
    app->add_option( "--re-model", re_model, "desk, none or a model JSON file" );
    app->add_option( "--key-model", key_model, "desk, none or a model JSON file" );
  }

  SurrogateModels models() const { return load_models( tau, wl_depth, trojan_model, re_model, key_model ); }

  std::shared_ptr<OracleBackend> oracle() const
  {
    if ( !external.empty() )
      return std::make_shared<ExternalOracle>( split_command( external ),
                                               std::chrono::milliseconds( static_cast<std::int64_t>( timeout * 1000 ) ) );
    return std::make_shared<BuiltinOracle>( models() );
  }
};

struct AttackOptions
{
  std::string checkpoint;
  std::string context;
  std::string circuit;
  std::optional<std::size_t> desk_index;
  std::size_t budget = 50;
  std::string out = "attack";
  std::optional<unsigned> horizon;
  std::optional<std::uint64_t> seed;
  OracleOptions oracle;
};

int cmd_attack( AttackOptions const& o )
{
  auto const seed = resolve_seed( o.seed, 0 );
  auto const ctx = parse_context( o.context );
  if ( o.circuit.empty() == !o.desk_index )
    throw UsageError( "give exactly one of --circuit and --desk-index" );
  if ( !fs::exists( o.checkpoint ) )
    throw UsageError( "missing checkpoint '" + o.checkpoint + "'" );
  TrainState state;
  try
  {
    state = load_checkpoint( o.checkpoint );
  }
  catch ( ParseError const& e )
  {
    throw UsageError( "corrupt checkpoint '" + o.checkpoint + "': " + e.what() );
  }

  PoolEntry target;
  if ( o.desk_index )
  {
    auto const desk = desk_setup();
    auto const& pool = desk.pools[index_of( ctx )];
    if ( *o.desk_index >= pool.size() )
      throw UsageError( "desk pool for " + o.context + " has " + std::to_string( pool.size() ) + " circuits" );
    target = pool[*o.desk_index];
  }
  else
    target = load_pool_entry( o.circuit, ctx );

  EnvOptions env;
  if ( o.horizon )
    env.horizon[index_of( ctx )] = *o.horizon;
  auto const result = attack( state.params, target, ctx, o.budget, o.oracle.oracle(), env, seed );

  fs::path const dir( o.out );
  fs::create_directories( dir );
  std::ofstream scores( dir / "scores.csv", std::ios::binary );
  scores << "episode,oracle_value,success,equivalence\n";
  std::vector<double> values;
  std::size_t successful = 0;
  for ( auto const& e : result.episodes )
  {
    scores << e.episode << "," << fmt( e.value ) << "," << ( e.success ? 1 : 0 ) << ","
           << ( e.equivalence ? to_string( *e.equivalence ) : "" ) << "\n";
    values.push_back( e.value );
    successful += e.success;
  }

  json circuits = json::array();
  for ( std::size_t i = 0; i < result.successes.size(); ++i )
  {
    auto const& s = result.successes[i];
    auto const name = target.name + "_adv" + std::to_string( i );
    write_snapshot( dir / "adversarial", name, s.netlist );
    json actions = json::array();
    for ( auto const a : s.actions )
      actions.push_back( to_string( a ) );
    circuits.push_back( { { "file", ( fs::path( "adversarial" ) / ( name + ".blif" ) ).string() },
                          { "oracle_value", s.score.value },
                          { "equivalence", to_string( s.verdict.status ) },
                          { "actions", actions } } );
  }

  json dist = json::object();
  if ( !values.empty() )
  {
    auto sorted = values;
    std::sort( sorted.begin(), sorted.end() );
    auto q = [&]( double p ) {
      double const pos = p * static_cast<double>( sorted.size() - 1 );
      auto const lo = static_cast<std::size_t>( pos );
      auto const hi = std::min( lo + 1, sorted.size() - 1 );
      return sorted[lo] + ( pos - static_cast<double>( lo ) ) * ( sorted[hi] - sorted[lo] );
    };
    double sum = 0.0;
    for ( auto const v : values )
      sum += v;
    dist = { { "min", sorted.front() }, { "q1", q( 0.25 ) },      { "median", q( 0.5 ) },
             { "q3", q( 0.75 ) },       { "max", sorted.back() }, { "mean", sum / static_cast<double>( values.size() ) } };
  }
  json summary = { { "context", to_string( ctx ) },
                   { "circuit", target.name },
                   { "budget", o.budget },
                   { "successful_episodes", successful },
                   { "unique_successes", result.successes.size() },
                   { "adversarial", circuits },
                   { "score_distribution", dist } };
  write_json( dir / "summary.json", summary );
  write_manifest( dir, "attack", g_args, seed, { { "checkpoint", o.checkpoint }, { "target", target.name } } );
  std::cout << to_string( ctx ) << " " << target.name << ": " << result.successes.size() << " unique successes ("
            << successful << "/" << o.budget << " successful episodes)\n";
  return 0;
}

// ---------------------------------------------------------------- audit / equiv / features

struct AuditOptions
{
  std::string original;
  std::string candidate;
  std::string action;
  std::uint64_t random = 4096;
  std::uint64_t seed = 0x5eed;
};

int cmd_audit( AuditOptions const& o )
{
  std::optional<ActionId> action;
  if ( !o.action.empty() )
  {
    action = action_from_string( o.action );
    if ( !action )
      throw UsageError( "unknown action '" + o.action + "' (a1..a10, noop)" );
  }
  auto const original = read_input( o.original );

  json v = { { "original", o.original }, { "candidate", o.candidate } };
  Netlist candidate;
  bool valid = true;
  try
  {
    candidate = read_input( o.candidate );
  }
  catch ( DesignRuleError const& e )
  {
    valid = false;
    v["design_rule"] = e.what();
  }
  v["valid"] = valid;

  bool pass = valid;
  if ( valid )
  {
    EquivalenceBudget budget;
    budget.n_random = o.random;
    budget.seed = o.seed;
    auto const eq = check_equivalence( original, candidate, budget );
    v["equivalence"] = to_string( eq.status );
    v["vectors"] = eq.vectors;
    pass = pass && eq.equivalent();
    if ( !eq.equivalent() )
    {
      v["failing_output"] = eq.failing_output;
      v["counterexample"] = counterexample_text( eq );
    }
    if ( action )
    {
      json bad = json::array();
      if ( *action != ActionId::Noop )
      {
        for ( auto const c : allowlist_violations( candidate, *action ) )
          bad.push_back( candidate.net_name( candidate.cell( c ).output ) );
      }
      v["action"] = to_string( *action );
      v["allowlist"] = bad.empty() ? "clean" : "violated";
      v["violations"] = bad;
      pass = pass && bad.empty();
    }
  }
  v["verdict"] = pass ? "pass" : "fail";
  std::cout << v.dump() << "\n";
  if ( v.contains( "counterexample" ) )
    std::cout << "counterexample (" << v["failing_output"].get<std::string>()
              << "): " << v["counterexample"].get<std::string>() << "\n";
  return pass ? 0 : 1;
}

int cmd_apply( std::string const& input, std::string const& action_name, std::string const& out )
{
  auto const action = action_from_string( action_name );
  if ( !action )
    throw UsageError( "unknown action '" + action_name + "' (a1..a10, noop)" );
  auto const result = apply_action( read_input( input ), *action );
  if ( out.empty() || out == "-" )
    std::cout << write_blif( result );
  else
    write_text_file( out, write_blif( result ) );
  return 0;
}

int cmd_equiv( std::string const& a, std::string const& b, std::uint64_t random, std::uint64_t seed )
{
  EquivalenceBudget budget;
  budget.n_random = random;
  budget.seed = seed;
  auto const v = check_equivalence( read_input( a ), read_input( b ), budget );
  std::cout << to_string( v.status ) << " vectors=" << v.vectors << "\n";
  if ( !v.equivalent() )
    std::cout << "counterexample (" << v.failing_output << "): " << counterexample_text( v ) << "\n";
  return v.equivalent() ? 0 : 1;
}

int cmd_features( std::vector<std::string> const& files, std::string const& context )
{
  std::optional<Context> ctx;
  if ( !context.empty() )
    ctx = parse_context( context );
  if ( ctx )
  {
    std::cout << "file";
    for ( auto const c : all_contexts )
      std::cout << ",ctx_" << to_string( c );
    for ( auto const n : feature_names )
      std::cout << ",obs_" << n;
    std::cout << "\n";
  }
  else
    std::cout << "file," << features_csv_header() << "\n";
  for ( auto const& f : files )
  {
    auto const fv = extract_features( read_input( f ) );
    std::cout << f;
    if ( ctx )
    {
      for ( auto const x : make_observation( fv, fv, *ctx ) )
        std::cout << "," << fmt( x );
      std::cout << "\n";
    }
    else
      std::cout << "," << features_csv_row( fv ) << "\n";
  }
  return 0;
}

} // namespace

int main( int argc, char** argv )
{
  g_args.assign( argv + 1, argv + argc );
  CLI::App app( "Adversarial circuit generation against graph-based hardware-security classifiers", "netforge" );
  app.require_subcommand( 1 );
  app.footer( "Seeds: --seed, else NETFORGE_SEED, else the config/default.\n"
              "Exit status: 0 success, 1 domain failure, 2 usage or I/O error." );

  GenOptions gen;
  auto* g = app.add_subcommand( "gen", "Generate a labeled Trojan, locked or RE-block circuit (or export the desk corpus)" );
  g->add_option( "kind", gen.kind, "trojan, obfuscate, re-blocks or desk" )->required();
  g->add_option( "host", gen.host, "Host circuit (trojan, obfuscate)" );
  g->add_option( "--trigger-width", gen.trigger_width, "Trojan trigger inputs" );
  g->add_option( "--keys", gen.keys, "Key bits to insert" );
  g->add_option( "--widths", gen.widths, "Block widths (2, 4, 8)" )->delimiter( ',' );
  g->add_option( "--kinds", gen.kinds, "Block kinds (add, sub, cmp, mul, ctrl)" )->delimiter( ',' );
  g->add_option( "--name", gen.name, "Output base name" );
  g->add_option( "-o,--out", gen.out, "Output directory" );
  g->add_option( "--model-out", gen.model_out, "Also write a surrogate trained on the generated instance" );
  g->add_option( "--seed", gen.seed, "Random seed" );

  TrainOptions tr;
  auto* t = app.add_subcommand( "train", "Train the multi-task policy" );
  t->add_option( "config", tr.config, "INI run configuration" )->required();
  t->add_option( "-o,--out", tr.out, "Run directory (overrides [run] output)" );
  t->add_option( "--resume", tr.resume, "Continue from a checkpoint" );
  t->add_option( "--seed", tr.seed, "Random seed" );
  t->add_option( "--total-steps", tr.total_steps, "Override [ppo] total_steps" );
  t->add_option( "--workers", tr.workers, "Override [ppo] workers" );

  AttackOptions at;
  auto* a = app.add_subcommand( "attack", "Generate adversarial circuits from one target with a trained policy" );
  a->add_option( "checkpoint", at.checkpoint, "Trained checkpoint" )->required();
  a->add_option( "--context", at.context, "piracy, trojan_loc, reverse_eng or obfuscation" )->required();
  a->add_option( "--circuit", at.circuit, "Target circuit (with its sidecar for trojan/RE/obfuscation)" );
  a->add_option( "--desk-index", at.desk_index, "Use this entry of the built-in pool instead" );
  a->add_option( "--budget", at.budget, "Episodes" );
  a->add_option( "--horizon", at.horizon, "Episode length override" )->check( CLI::PositiveNumber );
  a->add_option( "-o,--out", at.out, "Report directory" );
  a->add_option( "--seed", at.seed, "Random seed" );
  at.oracle.add( a );

  AuditOptions au;
  auto* u = app.add_subcommand( "audit", "Check validity, equivalence and (with --action) the cell allowlist" );
  u->add_option( "original", au.original )->required();
  u->add_option( "candidate", au.candidate )->required();
  u->add_option( "--action", au.action, "a1..a10 or noop" );
  u->add_option( "--random", au.random, "Random vectors beyond the exhaustive limit" );
  u->add_option( "--seed", au.seed, "Simulation seed" );

  std::string eq_a, eq_b;
  std::uint64_t eq_random = 4096, eq_seed = 0x5eed;
  auto* e = app.add_subcommand( "equiv", "Combinational equivalence check" );
  e->add_option( "a", eq_a )->required();
  e->add_option( "b", eq_b )->required();
  e->add_option( "--random", eq_random, "Random vectors beyond the exhaustive limit" );
  e->add_option( "--seed", eq_seed, "Simulation seed" );

  std::vector<std::string> feat_files;
  std::string feat_context;
  auto* f = app.add_subcommand( "features", "Print the 13 structural features (or observations) as CSV" );
  f->add_option( "files", feat_files )->required();
  f->add_option( "--context", feat_context, "Print the normalized observation for this context instead" );

  std::string ap_in, ap_action, ap_out;
  auto* p = app.add_subcommand( "apply", "Apply one synthesis action and write BLIF" );
  p->add_option( "input", ap_in )->required();
  p->add_option( "--action", ap_action, "a1..a10 or noop" )->required();
  p->add_option( "-o,--out", ap_out, "Output file (default stdout)" );

  OracleOptions serve_opts;
  auto* s = app.add_subcommand( "protocol-serve", "Answer oracle requests on stdin/stdout with the built-in surrogates" );
  serve_opts.add( s );

  try
  {
    app.parse( argc, argv );
  }
  catch ( CLI::ParseError const& err )
  {
    int const code = app.exit( err );
    return code == 0 ? 0 : 2;
  }

  try
  {
    if ( *g )
      return cmd_gen( gen );
    if ( *t )
      return cmd_train( tr );
    if ( *a )
      return cmd_attack( at );
    if ( *u )
      return cmd_audit( au );
    if ( *e )
      return cmd_equiv( eq_a, eq_b, eq_random, eq_seed );
    if ( *p )
      return cmd_apply( ap_in, ap_action, ap_out );
    if ( *f )
      return cmd_features( feat_files, feat_context );
    if ( *s )
    {
      std::ios::sync_with_stdio( false );
      serve( std::cin, std::cout, serve_opts.models() );
      return 0;
    }
  }
  catch ( UsageError const& err )
  {
    std::cerr << "netforge: " << err.what() << "\n";
    return 2;
  }
  catch ( ParseError const& err )
  {
    std::cerr << "netforge: " << err.what() << "\n";
    return 2;
  }
  catch ( fs::filesystem_error const& err )
  {
    std::cerr << "netforge: " << err.what() << "\n";
    return 2;
  }
  catch ( std::exception const& err )
  {
    std::cerr << "netforge: " << err.what() << "\n";
    return 1;
  }
  return 2;
}
