#include <netforge/adapter.hpp>

#include <netforge/error.hpp>
#include <netforge/io.hpp>

#include <cerrno>
#include <csignal>
#include <cstring>
#include <istream>
#include <ostream>

#include <poll.h>
#include <sys/wait.h>
#include <unistd.h>

namespace netforge
{

using nlohmann::json;

json encode_request( std::uint64_t id, OracleRequest const& r )
{
  json j = { { "id", id }, { "context", to_string( r.context ) }, { "circuit_blif", r.circuit_blif } };
  if ( r.reference_blif )
    j["reference_blif"] = *r.reference_blif;
  if ( r.truth )
    j["truth"] = *r.truth;
  if ( r.key_gates )
    j["key_gates"] = *r.key_gates;
  return j;
}

std::pair<std::uint64_t, OracleRequest> decode_request( json const& m )
{
  if ( !m.is_object() || !m.contains( "id" ) || !m["id"].is_number_unsigned() )
    throw ProtocolError( "request needs a non-negative integer id" );
  if ( !m.contains( "context" ) || !m["context"].is_string() )
    throw ProtocolError( "request needs a context" );
  auto const ctx = context_from_string( m["context"].get<std::string>() );
  if ( !ctx )
    throw ProtocolError( "unknown context '" + m["context"].get<std::string>() + "'" );
  if ( !m.contains( "circuit_blif" ) || !m["circuit_blif"].is_string() )
    throw ProtocolError( "request needs circuit_blif" );
  OracleRequest r;
  r.context = *ctx;
  r.circuit_blif = m["circuit_blif"].get<std::string>();
  if ( m.contains( "reference_blif" ) )
  {
    if ( !m["reference_blif"].is_string() )
      throw ProtocolError( "reference_blif must be a string" );
    r.reference_blif = m["reference_blif"].get<std::string>();
  }
  if ( m.contains( "truth" ) )
  {
    if ( !m["truth"].is_object() )
      throw ProtocolError( "truth must be an object" );
    r.truth = m["truth"];
  }
  if ( m.contains( "key_gates" ) )
  {
    if ( !m["key_gates"].is_array() )
      throw ProtocolError( "key_gates must be an array" );
    r.key_gates = m["key_gates"];
  }
  return { m["id"].get<std::uint64_t>(), std::move( r ) };
}

OracleScore decode_response( std::string const& line, std::uint64_t expected_id, Context context )
{
  json m;
  try
  {
    m = json::parse( line );
  }
  catch ( json::parse_error const& e )
  {
    throw ProtocolError( std::string( "response is not valid JSON: " ) + e.what() );
  }
  if ( !m.is_object() )
    throw ProtocolError( "response is not an object" );
  if ( !m.contains( "id" ) || !m["id"].is_number_unsigned() || m["id"].get<std::uint64_t>() != expected_id )
    throw ProtocolError( "response id does not match request " + std::to_string( expected_id ) );
  if ( m.contains( "error" ) )
    throw ProtocolError( "adapter error: " + m["error"].dump() );
  if ( !m.contains( "value" ) || !m["value"].is_number() )
    throw ProtocolError( "response needs a numeric value" );
  OracleScore s;
  s.context = context;
  s.metric = metric_for( context );
  s.value = m["value"].get<double>();
  if ( m.contains( "per_node" ) )
  {
    if ( !m["per_node"].is_object() )
      throw ProtocolError( "per_node must be an object" );
    for ( auto const& [k, v] : m["per_node"].items() )
    {
      if ( !v.is_string() )
        throw ProtocolError( "per_node labels must be strings" );
      s.per_node[k] = v.get<std::string>();
    }
  }
  check_range( s );
  return s;
}

json truth_payload( Netlist const& netlist, NodeLabels const& truth )
{
  json j = json::object();
  for ( CellId c = 0; c < netlist.num_cells() && c < truth.size(); ++c )
  {
    if ( !truth[c].empty() )
      j[netlist.net_name( netlist.cell( c ).output )] = truth[c];
  }
  return j;
}

json key_payload( Netlist const& netlist, std::vector<KeyGate> const& key_gates )
{
  json j = json::array();
  for ( auto const& k : key_gates )
    j.push_back( { { "net", netlist.net_name( netlist.cell( k.cell ).output ) }, { "bit", k.bit ? 1 : 0 } } );
  return j;
}

AdapterProcess::AdapterProcess( std::vector<std::string> argv, std::chrono::milliseconds timeout )
    : timeout_( timeout )
{
  if ( argv.empty() )
    throw InterfaceError( "adapter command is empty" );
  std::signal( SIGPIPE, SIG_IGN );
  int in[2], out[2];
  if ( pipe( in ) != 0 || pipe( out ) != 0 )
    throw InterfaceError( std::string( "pipe: " ) + std::strerror( errno ) );
  pid_ = fork();
  if ( pid_ < 0 )
    throw InterfaceError( std::string( "fork: " ) + std::strerror( errno ) );
  if ( pid_ == 0 )
  {
    dup2( in[0], STDIN_FILENO );
    dup2( out[1], STDOUT_FILENO );
    close( in[0] );
    close( in[1] );
    close( out[0] );
    close( out[1] );
    std::vector<char*> args;
    for ( auto& a : argv )
      args.push_back( a.data() );
    args.push_back( nullptr );
    execvp( args[0], args.data() );
    _exit( 127 );
  }
  close( in[0] );
  close( out[1] );
  to_child_ = in[1];
  from_child_ = out[0];
}

AdapterProcess::~AdapterProcess()
{
  if ( to_child_ >= 0 )
    close( to_child_ );
  if ( from_child_ >= 0 )
    close( from_child_ );
  if ( pid_ > 0 )
  {
    int status = 0;
    // give a well-behaved adapter a moment to exit on EOF
    for ( int i = 0; i < 50; ++i )
    {
      if ( waitpid( pid_, &status, WNOHANG ) == pid_ )
        return;
      usleep( 10000 );
    }
    kill( pid_, SIGKILL );
    waitpid( pid_, &status, 0 );
  }
}

std::string AdapterProcess::read_line()
{
  auto const deadline = std::chrono::steady_clock::now() + timeout_;
  while ( true )
  {
    if ( auto const nl = buffer_.find( '\n' ); nl != std::string::npos )
    {
      auto line = buffer_.substr( 0, nl );
      buffer_.erase( 0, nl + 1 );
      return line;
    }
    auto const left = std::chrono::duration_cast<std::chrono::milliseconds>( deadline - std::chrono::steady_clock::now() );
    if ( left.count() <= 0 )
      throw TimeoutError( "adapter did not answer within " + std::to_string( timeout_.count() ) + " ms" );
    pollfd p{ from_child_, POLLIN, 0 };
    auto const ready = poll( &p, 1, static_cast<int>( left.count() ) );
    if ( ready < 0 && errno != EINTR )
      throw ProtocolError( std::string( "poll: " ) + std::strerror( errno ) );
    if ( ready <= 0 )
      continue;
    char chunk[65536];
    auto const got = read( from_child_, chunk, sizeof chunk );
    if ( got <= 0 )
      throw ProtocolError( "adapter closed its output" );
    buffer_.append( chunk, static_cast<std::size_t>( got ) );
  }
}

std::string AdapterProcess::exchange( std::string const& line )
{
  auto const msg = line + "\n";
  std::size_t sent = 0;
  while ( sent < msg.size() )
  {
    auto const n = write( to_child_, msg.data() + sent, msg.size() - sent );
    if ( n < 0 )
    {
      if ( errno == EINTR )
        continue;
      throw ProtocolError( "adapter closed its input" );
    }
    sent += static_cast<std::size_t>( n );
  }
  return read_line();
}

OracleScore AdapterProcess::query( OracleRequest const& request )
{
  auto const id = next_id_++;
  return decode_response( exchange( encode_request( id, request ).dump() ), id, request.context );
}

namespace
{

NodeLabels labels_by_net( Netlist const& n, json const& truth )
{
  NodeLabels labels( n.num_cells() );
  for ( auto const& [net, label] : truth.items() )
  {
    auto const id = n.find_net( net );
    if ( !id || !label.is_string() )
      throw ProtocolError( "truth entry '" + net + "' does not name a net with a string label" );
    bool found = false;
    for ( CellId c = 0; c < n.num_cells(); ++c )
    {
      if ( n.cell( c ).output == *id )
      {
        labels[c] = label.get<std::string>();
        found = true;
        break;
      }
    }
    if ( !found )
      throw ProtocolError( "truth entry '" + net + "' is not driven by a cell" );
  }
  return labels;
}

NodeModel const& need( std::optional<NodeModel> const& m, Context c )
{
  if ( !m )
    throw ProtocolError( "no model loaded for context " + std::string( to_string( c ) ) );
  return *m;
}

} // namespace

OracleScore score_request( OracleRequest const& r, SurrogateModels const& models )
{
  auto const circuit = parse_blif( r.circuit_blif );
  switch ( r.context )
  {
  case Context::Piracy:
    if ( !r.reference_blif )
      throw ProtocolError( "piracy request needs reference_blif" );
    return piracy_score( circuit, parse_blif( *r.reference_blif ), models.tau, models.h );
  case Context::TrojanLoc:
    if ( !r.truth )
      throw ProtocolError( "trojan_loc request needs truth" );
    return trojan_loc_score( circuit, labels_by_net( circuit, *r.truth ), need( models.trojan, r.context ) );
  case Context::ReverseEng:
    if ( !r.truth )
      throw ProtocolError( "reverse_eng request needs truth" );
    return re_accuracy( circuit, labels_by_net( circuit, *r.truth ), need( models.reverse_eng, r.context ) );
  case Context::Obfuscation:
  {
    if ( !r.key_gates )
      throw ProtocolError( "obfuscation request needs key_gates" );
    std::vector<KeyGate> keys;
    for ( auto const& k : *r.key_gates )
    {
      if ( !k.is_object() || !k.contains( "net" ) || !k["net"].is_string() || !k.contains( "bit" ) ||
           !k["bit"].is_number_integer() )
        throw ProtocolError( "key gate entries need a net and a bit" );
      auto const labels = labels_by_net( circuit, json{ { k["net"].get<std::string>(), "k" } } );
      auto const cell = static_cast<CellId>( std::find( labels.begin(), labels.end(), "k" ) - labels.begin() );
      keys.push_back( { cell, k["bit"].get<int>() != 0 } );
    }
    return key_prediction_accuracy( circuit, keys, need( models.key, r.context ) );
  }
  }
  throw ProtocolError( "unknown context" );
}

void serve( std::istream& in, std::ostream& out, SurrogateModels const& models )
{
  std::string line;
  while ( std::getline( in, line ) )
  {
    if ( line.empty() )
      continue;
    json reply;
    json id = nullptr;
    try
    {
      auto const message = json::parse( line );
      if ( message.is_object() && message.contains( "id" ) )
        id = message["id"];
      auto const [rid, request] = decode_request( message );
      auto const score = score_request( request, models );
      reply = { { "id", rid }, { "value", score.value } };
      if ( !score.per_node.empty() )
        reply["per_node"] = score.per_node;
    }
    catch ( std::exception const& e )
    {
      reply = { { "id", id }, { "error", e.what() } };
    }
    out << reply.dump() << '\n' << std::flush;
  }
}

} // namespace netforge
