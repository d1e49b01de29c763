#include <netforge/run.hpp>

#include <netforge/error.hpp>
#include <netforge/generators.hpp>
#include <netforge/io.hpp>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <functional>
#include <map>
#include <sstream>

namespace netforge
{

namespace
{

using nlohmann::json;

std::string trim( std::string s )
{
  auto const b = s.find_first_not_of( " \t\r\n" );
  if ( b == std::string::npos )
    return {};
  auto const e = s.find_last_not_of( " \t\r\n" );
  return s.substr( b, e - b + 1 );
}

std::vector<std::string> split_list( std::string const& v )
{
  std::vector<std::string> out;
  std::stringstream ss( v );
  std::string item;
  while ( std::getline( ss, item, ',' ) )
  {
    item = trim( item );
    if ( !item.empty() )
      out.push_back( item );
  }
  return out;
}

template<class T>
std::optional<T> parse_number( std::string const& v )
{
  T x{};
  auto const* end = v.data() + v.size();
  auto const r = std::from_chars( v.data(), end, x );
  if ( r.ec != std::errc{} || r.ptr != end )
    return std::nullopt;
  return x;
}

std::optional<double> parse_real( std::string const& v )
{
  if ( v.empty() )
    return std::nullopt;
  char* end = nullptr;
  double const x = std::strtod( v.c_str(), &end );
  if ( end != v.c_str() + v.size() )
    return std::nullopt;
  return x;
}

std::optional<bool> parse_bool( std::string const& v )
{
  if ( v == "true" || v == "yes" || v == "on" || v == "1" )
    return true;
  if ( v == "false" || v == "no" || v == "off" || v == "0" )
    return false;
  return std::nullopt;
}

DeskSetup const& desk()
{
  static DeskSetup const d = desk_setup();
  return d;
}

std::vector<std::string> const& names_for( Context c )
{
  static auto const trojan = trojan_label_names();
  static auto const re = re_label_names();
  return c == Context::TrojanLoc ? trojan : re;
}

json read_json_file( std::filesystem::path const& path )
{
  if ( !std::filesystem::exists( path ) )
    throw UsageError( "missing file '" + path.string() + "'" );
  try
  {
    return json::parse( read_text_file( path ) );
  }
  catch ( json::exception const& e )
  {
    throw UsageError( "'" + path.string() + "' is not valid JSON: " + e.what() );
  }
}

} // namespace

RunConfig parse_run_config( std::string const& text, std::filesystem::path const& base )
{
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try
  {
    std::istringstream in( text );
    pt::read_ini( in, tree );
  }
  catch ( pt::ini_parser_error const& e )
  {
    throw UsageError( "config line " + std::to_string( e.line() ) + ": " + e.message() );
  }

  RunConfig c;
  std::vector<std::string> problems;
  auto resolve = [&]( std::string const& p ) {
    std::filesystem::path path( p );
    return path.is_absolute() || base.empty() ? path : base / path;
  };

  using Setter = std::function<bool( std::string const& )>;
  auto real = [&]( double& dst ) {
    return Setter( [&dst]( std::string const& v ) { auto x = parse_real( v ); if ( x ) dst = *x; return x.has_value(); } );
  };
  auto boolean = [&]( bool& dst ) {
    return Setter( [&dst]( std::string const& v ) { auto x = parse_bool( v ); if ( x ) dst = *x; return x.has_value(); } );
  };
  auto count = [&]( auto& dst ) {
    return Setter( [&dst]( std::string const& v ) {
      auto x = parse_number<std::uint64_t>( v );
      if ( x )
        dst = static_cast<std::remove_reference_t<decltype( dst )>>( *x );
      return x.has_value();
    } );
  };
  auto text_value = [&]( std::string& dst ) {
    return Setter( [&dst]( std::string const& v ) { dst = v; return !v.empty(); } );
  };

  std::map<std::string, std::map<std::string, Setter>> schema;
  schema["run"]["output"] = [&]( std::string const& v ) { c.output = resolve( v ); return !v.empty(); };
  schema["run"]["seed"] = count( c.seed );
  schema["run"]["trace"] = boolean( c.trace );
  for ( auto const ctx : all_contexts )
  {
    schema["corpus"][std::string( to_string( ctx ) )] = [&c, &resolve, ctx]( std::string const& v ) {
      for ( auto const& item : split_list( v ) )
        c.corpus[index_of( ctx )].push_back( item == "desk" ? item : resolve( item ).string() );
      return true;
    };
  }
  schema["oracle"]["kind"] = text_value( c.oracle );
  schema["oracle"]["command"] = [&]( std::string const& v ) { c.oracle_command = split_command( v ); return true; };
  schema["oracle"]["timeout"] = real( c.oracle_timeout );
  schema["oracle"]["tau"] = real( c.tau );
  schema["oracle"]["wl_depth"] = count( c.wl_depth );
  auto model = [&]( std::string& dst ) {
    return Setter( [&dst, &resolve]( std::string const& v ) {
      dst = v == "desk" || v == "none" ? v : resolve( v ).string();
      return !v.empty();
    } );
  };
  schema["oracle"]["trojan_model"] = model( c.trojan_model );
  schema["oracle"]["re_model"] = model( c.re_model );
  schema["oracle"]["key_model"] = model( c.key_model );
  schema["env"]["alpha"] = real( c.env.alpha );
  schema["env"]["dense"] = boolean( c.env.dense );
  schema["env"]["verify_equivalence"] = boolean( c.env.verify_equivalence );
  for ( auto const ctx : all_contexts )
    schema["env"]["horizon_" + std::string( to_string( ctx ) )] = count( c.env.horizon[index_of( ctx )] );
  auto& t = c.train;
  schema["ppo"]["gamma"] = real( t.gamma );
  schema["ppo"]["gae_lambda"] = real( t.gae_lambda );
  schema["ppo"]["clip_ratio"] = real( t.clip_ratio );
  schema["ppo"]["learning_rate"] = real( t.learning_rate );
  schema["ppo"]["update_epochs"] = count( t.update_epochs );
  schema["ppo"]["minibatch_size"] = count( t.minibatch_size );
  schema["ppo"]["entropy_coef"] = real( t.entropy_coef );
  schema["ppo"]["value_coef"] = real( t.value_coef );
  schema["ppo"]["max_grad_norm"] = real( t.max_grad_norm );
  schema["ppo"]["rollout_steps"] = count( t.rollout_steps );
  schema["ppo"]["total_steps"] = count( t.total_steps );
  schema["ppo"]["hidden"] = count( t.hidden );
  schema["ppo"]["workers"] = count( t.workers );

  for ( auto const& [section, keys] : tree )
  {
    auto const s = schema.find( section );
    if ( s == schema.end() )
    {
      if ( !keys.data().empty() || keys.empty() )
        problems.push_back( "unknown key or section '" + section + "'" );
      else
        problems.push_back( "unknown section [" + section + "]" );
      continue;
    }
    for ( auto const& [key, value] : keys )
    {
      auto const k = s->second.find( key );
      if ( k == s->second.end() )
      {
        problems.push_back( "unknown key '" + key + "' in [" + section + "]" );
        continue;
      }
      auto const v = trim( value.data() );
      if ( !k->second( v ) )
        problems.push_back( "[" + section + "] " + key + ": bad value '" + v + "'" );
    }
  }
  c.train.seed = c.seed;

  for ( auto const& p : c.train.problems() )
    problems.push_back( "[ppo] " + p );
  if ( !( c.env.alpha > 0.0 ) )
    problems.push_back( "[env] alpha must be positive" );
  for ( auto const ctx : all_contexts )
    if ( c.env.horizon[index_of( ctx )] == 0 )
      problems.push_back( "[env] horizon_" + std::string( to_string( ctx ) ) + " must be at least 1" );
  if ( c.oracle != "builtin" && c.oracle != "external" )
    problems.push_back( "[oracle] kind must be 'builtin' or 'external'" );
  if ( c.oracle == "external" && c.oracle_command.empty() )
    problems.push_back( "[oracle] external oracle needs a command" );
  if ( !( c.oracle_timeout > 0.0 ) )
    problems.push_back( "[oracle] timeout must be positive" );
  if ( !( c.tau >= -1.0 && c.tau <= 1.0 ) )
    problems.push_back( "[oracle] tau must be in [-1, 1]" );

  bool any = false;
  for ( auto const ctx : all_contexts )
  {
    for ( auto const& item : c.corpus[index_of( ctx )] )
    {
      any = true;
      if ( item != "desk" && !std::filesystem::exists( item ) )
        problems.push_back( "[corpus] " + std::string( to_string( ctx ) ) + ": no such path '" + item + "'" );
    }
  }
  if ( !any )
    problems.push_back( "[corpus] no circuits for any context" );
  if ( c.oracle == "builtin" )
  {
    std::array<std::pair<Context, std::string const*>, 3> const models = {
        std::pair{ Context::TrojanLoc, &c.trojan_model }, std::pair{ Context::ReverseEng, &c.re_model },
        std::pair{ Context::Obfuscation, &c.key_model } };
    for ( auto const& [ctx, spec] : models )
    {
      if ( *spec != "desk" && *spec != "none" && !std::filesystem::exists( *spec ) )
        problems.push_back( "[oracle] no such model file '" + *spec + "'" );
      if ( *spec == "none" && !c.corpus[index_of( ctx )].empty() )
        problems.push_back( "[oracle] context " + std::string( to_string( ctx ) ) + " has circuits but no model" );
    }
  }

  if ( !problems.empty() )
  {
    std::string msg = "invalid configuration:";
    for ( auto const& p : problems )
      msg += "\n  " + p;
    throw UsageError( msg );
  }
  return c;
}

RunConfig load_run_config( std::filesystem::path const& path )
{
  if ( !std::filesystem::exists( path ) )
    throw UsageError( "missing config file '" + path.string() + "'" );
  return parse_run_config( read_text_file( path ), path.parent_path() );
}

json truth_sidecar( Context context, Netlist const& netlist, NodeLabels const& truth )
{
  return { { "format", "netforge-truth" },
           { "version", 1 },
           { "context", to_string( context ) },
           { "labels", truth_payload( netlist, truth ) } };
}

json key_sidecar( std::vector<std::string> const& key_inputs, std::vector<bool> const& key )
{
  json bits = json::array();
  for ( bool const b : key )
    bits.push_back( b ? 1 : 0 );
  return { { "format", "netforge-key" }, { "version", 1 }, { "key_inputs", key_inputs }, { "key", bits } };
}

std::filesystem::path truth_sidecar_path( std::filesystem::path const& circuit )
{
  auto p = circuit;
  return p.replace_extension( ".truth.json" );
}

std::filesystem::path key_sidecar_path( std::filesystem::path const& circuit )
{
  auto p = circuit;
  return p.replace_extension( ".key.json" );
}

PoolEntry load_pool_entry( std::filesystem::path const& circuit, Context context )
{
  if ( !std::filesystem::exists( circuit ) )
    throw UsageError( "missing file '" + circuit.string() + "'" );
  PoolEntry e;
  e.name = circuit.stem().string();
  try
  {
    e.circuit = read_netlist_file( circuit );
  }
  catch ( Error const& err )
  {
    throw UsageError( "'" + circuit.string() + "': " + err.what() );
  }

  if ( context == Context::TrojanLoc || context == Context::ReverseEng )
  {
    auto const path = truth_sidecar_path( circuit );
    auto const j = read_json_file( path );
    try
    {
      if ( j.at( "format" ) != "netforge-truth" )
        throw UsageError( "not a truth file" );
      auto const& labels = j.at( "labels" );
      NodeLabels truth( e.circuit.num_cells() );
      for ( auto const& [net, label] : labels.items() )
      {
        auto const id = e.circuit.find_net( net );
        if ( !id )
          throw UsageError( "unknown net '" + net + "'" );
        bool found = false;
        for ( CellId cid = 0; cid < e.circuit.num_cells(); ++cid )
        {
          if ( e.circuit.cell( cid ).output == *id )
          {
            truth[cid] = label.get<std::string>();
            found = true;
          }
        }
        if ( !found )
          throw UsageError( "net '" + net + "' has no driving cell" );
      }
      tags_from_labels( e.circuit, truth, names_for( context ) );
    }
    catch ( json::exception const& err )
    {
      throw UsageError( "'" + path.string() + "': " + err.what() );
    }
    catch ( Error const& err )
    {
      throw UsageError( "'" + path.string() + "': " + err.what() );
    }
  }
  else if ( context == Context::Obfuscation )
  {
    auto const path = key_sidecar_path( circuit );
    auto const j = read_json_file( path );
    try
    {
      if ( j.at( "format" ) != "netforge-key" )
        throw UsageError( "not a key file" );
      e.key_inputs = j.at( "key_inputs" ).get<std::vector<std::string>>();
      for ( auto const& b : j.at( "key" ) )
      {
        auto const v = b.get<int>();
        if ( v != 0 && v != 1 )
          throw UsageError( "key bits must be 0 or 1" );
        e.key.push_back( v == 1 );
      }
      if ( e.key.empty() || e.key.size() != e.key_inputs.size() )
        throw UsageError( "key and key_inputs differ in length" );
      for ( auto const& k : e.key_inputs )
      {
        auto const id = e.circuit.find_net( k );
        if ( !id || !e.circuit.is_input( *id ) )
          throw UsageError( "key input '" + k + "' is not a primary input" );
      }
      auto const gates = locate_key_gates( e.circuit, e.key_inputs );
      for ( auto const g : gates )
        e.circuit.set_cell_tag( g, tag_key_gate );
    }
    catch ( json::exception const& err )
    {
      throw UsageError( "'" + path.string() + "': " + err.what() );
    }
    catch ( Error const& err )
    {
      throw UsageError( "'" + path.string() + "': " + err.what() );
    }
  }
  return e;
}

void save_pool_entry( std::filesystem::path const& dir, PoolEntry const& entry, Context context )
{
  auto const path = write_snapshot( dir, entry.name, entry.circuit );
  switch ( context )
  {
  case Context::TrojanLoc:
    write_text_file( truth_sidecar_path( path ),
                     truth_sidecar( context, entry.circuit, trojan_truth( entry.circuit ) ).dump( 1 ) + "\n" );
    break;
  case Context::ReverseEng:
    write_text_file( truth_sidecar_path( path ),
                     truth_sidecar( context, entry.circuit, re_truth( entry.circuit ) ).dump( 1 ) + "\n" );
    break;
  case Context::Obfuscation:
    write_text_file( key_sidecar_path( path ), key_sidecar( entry.key_inputs, entry.key ).dump( 1 ) + "\n" );
    break;
  case Context::Piracy:
    break;
  }
}

Pools load_pools( RunConfig const& config )
{
  Pools pools;
  for ( auto const ctx : all_contexts )
  {
    auto& pool = pools[index_of( ctx )];
    for ( auto const& item : config.corpus[index_of( ctx )] )
    {
      if ( item == "desk" )
      {
        auto const& d = desk().pools[index_of( ctx )];
        pool.insert( pool.end(), d.begin(), d.end() );
        continue;
      }
      std::filesystem::path const p( item );
      if ( std::filesystem::is_directory( p ) )
      {
        std::vector<std::filesystem::path> files;
        for ( auto const& f : std::filesystem::directory_iterator( p ) )
          if ( f.is_regular_file() && ( f.path().extension() == ".blif" || f.path().extension() == ".v" ) )
            files.push_back( f.path() );
        std::sort( files.begin(), files.end() );
        if ( files.empty() )
          throw UsageError( "no .blif or .v files in '" + p.string() + "'" );
        for ( auto const& f : files )
          pool.push_back( load_pool_entry( f, ctx ) );
      }
      else
        pool.push_back( load_pool_entry( p, ctx ) );
    }
  }
  return pools;
}

std::optional<NodeModel> load_model( std::string const& spec, Context context )
{
  if ( spec == "none" )
    return std::nullopt;
  if ( spec == "desk" )
  {
    auto const& m = desk().models;
    return context == Context::TrojanLoc ? m.trojan : context == Context::ReverseEng ? m.reverse_eng : m.key;
  }
  auto const j = read_json_file( spec );
  try
  {
    return NodeModel::from_json( j );
  }
  catch ( std::exception const& e )
  {
    throw UsageError( "'" + spec + "' is not a node model: " + e.what() );
  }
}

SurrogateModels load_models( double tau, unsigned wl_depth, std::string const& trojan, std::string const& re,
                             std::string const& key )
{
  SurrogateModels m;
  m.tau = tau;
  m.h = wl_depth;
  m.trojan = load_model( trojan, Context::TrojanLoc );
  m.reverse_eng = load_model( re, Context::ReverseEng );
  m.key = load_model( key, Context::Obfuscation );
  return m;
}

std::shared_ptr<OracleBackend> make_oracle( RunConfig const& config )
{
  if ( config.oracle == "external" )
    return std::make_shared<ExternalOracle>(
        config.oracle_command,
        std::chrono::milliseconds( static_cast<std::int64_t>( config.oracle_timeout * 1000.0 ) ) );
  return std::make_shared<BuiltinOracle>(
      load_models( config.tau, config.wl_depth, config.trojan_model, config.re_model, config.key_model ) );
}

std::vector<std::string> split_command( std::string const& line )
{
  std::vector<std::string> out;
  std::string cur;
  bool in_token = false;
  char quote = 0;
  for ( char const ch : line )
  {
    if ( quote )
    {
      if ( ch == quote )
        quote = 0;
      else
        cur += ch;
    }
    else if ( ch == '\'' || ch == '"' )
    {
      quote = ch;
      in_token = true;
    }
    else if ( ch == ' ' || ch == '\t' )
    {
      if ( in_token )
        out.push_back( std::move( cur ) );
      cur.clear();
      in_token = false;
    }
    else
    {
      cur += ch;
      in_token = true;
    }
  }
  if ( quote )
    throw UsageError( "unterminated quote in command '" + line + "'" );
  if ( in_token )
    out.push_back( std::move( cur ) );
  return out;
}

std::uint64_t resolve_seed( std::optional<std::uint64_t> flag, std::uint64_t fallback )
{
  if ( flag )
    return *flag;
  if ( char const* env = std::getenv( "NETFORGE_SEED" ) )
  {
    auto const v = parse_number<std::uint64_t>( trim( env ) );
    if ( !v )
      throw UsageError( std::string( "NETFORGE_SEED is not an unsigned integer: '" ) + env + "'" );
    return *v;
  }
  return fallback;
}

std::uint64_t derive_seed( std::uint64_t seed, std::uint64_t a, std::uint64_t b )
{
  // splitmix64 over the three words
  auto mix = []( std::uint64_t z ) {
    z += 0x9e3779b97f4a7c15ull;
    z = ( z ^ ( z >> 30 ) ) * 0xbf58476d1ce4e5b9ull;
    z = ( z ^ ( z >> 27 ) ) * 0x94d049bb133111ebull;
    return z ^ ( z >> 31 );
  };
  return mix( mix( mix( seed ) ^ a ) ^ b );
}

void write_manifest( std::filesystem::path const& dir, std::string const& command,
                     std::vector<std::string> const& args, std::uint64_t seed, json const& extra )
{
  json j = { { "tool", "netforge" }, { "command", command }, { "args", args }, { "seed", seed } };
  for ( auto const& [k, v] : extra.items() )
    j[k] = v;
  std::filesystem::create_directories( dir );
  write_text_file( dir / "manifest.json", j.dump( 1 ) + "\n" );
}

} // namespace netforge
