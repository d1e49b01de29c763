#include <netforge/io.hpp>

#include <netforge/error.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace netforge
{

namespace
{

struct Token
{
  std::string text;
  std::size_t column;
};

struct Line
{
  std::size_t number;
  std::vector<Token> tokens;
};

/// Logical lines: comments stripped, backslash continuations joined, blanks dropped.
std::vector<Line> split_lines( std::string_view text )
{
  std::vector<Line> lines;
  std::size_t number = 0;
  std::size_t pos = 0;
  bool continued = false;
  while ( pos <= text.size() )
  {
    auto const end = std::min( text.find( '\n', pos ), text.size() );
    std::string_view raw = text.substr( pos, end - pos );
    ++number;
    pos = end + 1;
    if ( auto const hash = raw.find( '#' ); hash != std::string_view::npos )
      raw = raw.substr( 0, hash );
    bool continues = false;
    auto trimmed_end = raw.find_last_not_of( " \t\r" );
    if ( trimmed_end != std::string_view::npos && raw[trimmed_end] == '\\' )
    {
      continues = true;
      raw = raw.substr( 0, trimmed_end );
    }
    std::vector<Token> tokens;
    std::size_t i = 0;
    while ( i < raw.size() )
    {
      while ( i < raw.size() && ( raw[i] == ' ' || raw[i] == '\t' || raw[i] == '\r' ) )
        ++i;
      if ( i >= raw.size() )
        break;
      auto const start = i;
      while ( i < raw.size() && raw[i] != ' ' && raw[i] != '\t' && raw[i] != '\r' )
        ++i;
      tokens.push_back( { std::string( raw.substr( start, i - start ) ), start + 1 } );
    }
    if ( continued && !lines.empty() )
    {
      for ( auto& t : tokens )
        lines.back().tokens.push_back( std::move( t ) );
    }
    else if ( !tokens.empty() )
    {
      lines.push_back( { number, std::move( tokens ) } );
    }
    continued = continues && ( !lines.empty() );
    if ( end == text.size() )
      break;
  }
  return lines;
}

struct Command
{
  Line head;
  std::vector<Line> rows;
};

struct Model
{
  std::string name;
  std::size_t line;
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  std::vector<Command> commands;
  bool blackbox = false;
};

[[noreturn]] void fail( std::string const& message, Line const& line, std::size_t token = 0 )
{
  auto const column = token < line.tokens.size() ? line.tokens[token].column : 1;
  throw ParseError( message, line.number, column );
}

std::vector<Model> split_models( std::vector<Line> const& lines )
{
  std::vector<Model> models;
  Model* current = nullptr;
  for ( auto const& line : lines )
  {
    auto const& head = line.tokens.front().text;
    if ( head[0] != '.' )
    {
      if ( !current || current->commands.empty() || current->commands.back().head.tokens[0].text != ".names" )
        fail( "cover row outside of a .names table", line );
      current->commands.back().rows.push_back( line );
      continue;
    }
    if ( head == ".model" )
    {
      if ( line.tokens.size() != 2 )
        fail( ".model expects exactly one name", line );
      models.push_back( { line.tokens[1].text, line.number, {}, {}, {}, false } );
      current = &models.back();
      continue;
    }
    if ( !current )
    {
      // a file without .model: treat as an anonymous top model
      models.push_back( { "top", line.number, {}, {}, {}, false } );
      current = &models.back();
    }
    if ( head == ".end" )
    {
      current = nullptr;
    }
    else if ( head == ".inputs" )
    {
      for ( std::size_t i = 1; i < line.tokens.size(); ++i )
        current->inputs.push_back( line.tokens[i].text );
    }
    else if ( head == ".outputs" )
    {
      for ( std::size_t i = 1; i < line.tokens.size(); ++i )
        current->outputs.push_back( line.tokens[i].text );
    }
    else if ( head == ".blackbox" )
    {
      current->blackbox = true;
    }
    else if ( head == ".names" || head == ".latch" || head == ".subckt" )
    {
      current->commands.push_back( { line, {} } );
    }
    else
    {
      fail( "unsupported BLIF construct '" + head + "'", line );
    }
  }
  if ( models.empty() )
    throw ParseError( "no .model found", 1, 1 );
  return models;
}

/// Function of a `.names` table over its inputs in listed order.
TruthTable cover_function( Command const& cmd )
{
  auto const num_inputs = cmd.head.tokens.size() - 2;
  if ( num_inputs > TruthTable::max_vars )
    fail( ".names with more than 8 inputs is not supported", cmd.head );
  TruthTable on_set( static_cast<std::uint32_t>( num_inputs ) );
  std::optional<bool> polarity;
  for ( auto const& row : cmd.rows )
  {
    std::string plane;
    std::string out;
    if ( num_inputs == 0 )
    {
      if ( row.tokens.size() != 1 )
        fail( "constant cover row must be a single 0 or 1", row );
      out = row.tokens[0].text;
    }
    else
    {
      if ( row.tokens.size() != 2 )
        fail( "cover row must have an input plane and an output value", row );
      plane = row.tokens[0].text;
      out = row.tokens[1].text;
      if ( plane.size() != num_inputs )
        fail( "cover row width does not match .names inputs", row );
    }
    if ( out != "0" && out != "1" )
      fail( "cover output must be 0 or 1", row, row.tokens.size() - 1 );
    bool const value = out == "1";
    if ( polarity && *polarity != value )
      fail( "mixed ON-set and OFF-set rows in one table", row );
    polarity = value;
    for ( std::uint32_t m = 0; m < on_set.num_bits(); ++m )
    {
      bool match = true;
      for ( std::size_t i = 0; i < num_inputs && match; ++i )
      {
        char const c = plane[i];
        bool const bit = ( m >> i ) & 1u;
        if ( c == '1' )
          match = bit;
        else if ( c == '0' )
          match = !bit;
        else if ( c != '-' )
          fail( std::string( "bad character '" ) + c + "' in cover", row );
      }
      if ( match )
        on_set.set_bit( m );
    }
  }
  if ( polarity && !*polarity )
    return ~on_set;
  return on_set;
}

TruthTable and_of_vars( std::uint32_t k )
{
  auto tt = TruthTable::constant( k, true );
  for ( std::uint32_t i = 0; i < k; ++i )
    tt = tt & TruthTable::nth_var( k, i );
  return tt;
}

TruthTable or_of_vars( std::uint32_t k )
{
  auto tt = TruthTable::constant( k, false );
  for ( std::uint32_t i = 0; i < k; ++i )
    tt = tt | TruthTable::nth_var( k, i );
  return tt;
}

struct Recognized
{
  GateKind kind;
  /// Per input: true when the input must be inverted before entering the gate.
  std::vector<bool> inverted;
};

std::optional<Recognized> recognize( TruthTable const& tt )
{
  auto const k = tt.num_vars();
  std::vector<bool> none( k, false );
  if ( tt.is_const0() )
    return Recognized{ GateKind::Const0, {} };
  if ( tt.is_const1() )
    return Recognized{ GateKind::Const1, {} };
  if ( k == 1 )
  {
    if ( tt == TruthTable::nth_var( 1, 0 ) )
      return Recognized{ GateKind::Buf, none };
    return Recognized{ GateKind::Inv, none };
  }
  auto const all_and = and_of_vars( k );
  auto const all_or = or_of_vars( k );
  if ( tt == all_and )
    return Recognized{ GateKind::And, none };
  if ( tt == ~all_and )
    return Recognized{ GateKind::Nand, none };
  if ( tt == all_or )
    return Recognized{ GateKind::Or, none };
  if ( tt == ~all_or )
    return Recognized{ GateKind::Nor, none };
  if ( k == 2 )
  {
    auto const x = TruthTable::nth_var( 2, 0 ) ^ TruthTable::nth_var( 2, 1 );
    if ( tt == x )
      return Recognized{ GateKind::Xor, none };
    if ( tt == ~x )
      return Recognized{ GateKind::Xnor, none };
  }
  if ( tt.count_ones() == 1 || tt.count_ones() == tt.num_bits() - 1 )
  {
    bool const single_on = tt.count_ones() == 1;
    std::uint32_t m = 0;
    while ( tt.get_bit( m ) != single_on )
      ++m;
    std::vector<bool> inverted( k );
    for ( std::uint32_t i = 0; i < k; ++i )
      inverted[i] = ( ( m >> i ) & 1u ) == 0;
    return Recognized{ single_on ? GateKind::And : GateKind::Nand, inverted };
  }
  return std::nullopt;
}

class TopBuilder
{
public:
  TopBuilder( Model const& top, std::vector<Model> const& models ) : top_( top )
  {
    for ( auto const& m : models )
      models_by_name_.emplace( m.name, &m );
    netlist_.set_name( top.name );
  }

  Netlist build()
  {
    for ( auto const& in : top_.inputs )
    {
      if ( netlist_.has_net( in ) )
        throw ParseError( "input '" + in + "' declared twice", top_.line, 1 );
      auto const id = netlist_.add_input( in );
      driven_.insert( id );
    }
    for ( auto const& cmd : top_.commands )
    {
      auto const& head = cmd.head.tokens[0].text;
      if ( head == ".names" )
        build_names( cmd );
      else if ( head == ".latch" )
        build_latch( cmd );
      else
        build_subckt( cmd );
    }
    for ( auto const& out : top_.outputs )
      netlist_.add_output( netlist_.get_or_add_net( out ) );
    require_valid( netlist_ );
    return std::move( netlist_ );
  }

private:
  NetId drive( std::string const& name, Line const& line, std::size_t token )
  {
    auto const id = netlist_.get_or_add_net( name );
    if ( !driven_.insert( id ).second )
      throw DesignRuleError( "line " + std::to_string( line.number ) + ", column " +
                             std::to_string( line.tokens[token].column ) + ": net '" + name +
                             "' has more than one driver" );
    return id;
  }

  NetId inverted( NetId net )
  {
    if ( auto const it = inverters_.find( net ); it != inverters_.end() )
      return it->second;
    auto const out = netlist_.add_net( netlist_.fresh_net_name( "inv" ) );
    netlist_.add_cell( GateKind::Inv, { net }, out );
    driven_.insert( out );
    inverters_.emplace( net, out );
    return out;
  }

  void build_names( Command const& cmd )
  {
    auto const& tokens = cmd.head.tokens;
    if ( tokens.size() < 2 )
      fail( ".names needs at least an output", cmd.head );
    auto const tt = cover_function( cmd );
    std::vector<NetId> ins;
    for ( std::size_t i = 1; i + 1 < tokens.size(); ++i )
      ins.push_back( netlist_.get_or_add_net( tokens[i].text ) );
    auto const out = drive( tokens.back().text, cmd.head, tokens.size() - 1 );

    if ( auto const rec = recognize( tt ) )
    {
      if ( rec->kind == GateKind::Const0 || rec->kind == GateKind::Const1 )
      {
        netlist_.add_cell( rec->kind, {}, out );
        return;
      }
      for ( std::size_t i = 0; i < ins.size(); ++i )
      {
        if ( rec->inverted[i] )
          ins[i] = inverted( ins[i] );
      }
      netlist_.add_cell( rec->kind, std::move( ins ), out );
      return;
    }
    auto const type = "F" + std::to_string( tt.num_vars() ) + "_" + tt.to_hex();
    netlist_.register_function( type, tt );
    netlist_.add_cell( GateKind::Other, std::move( ins ), out, -1, type );
  }

  void build_latch( Command const& cmd )
  {
    auto const& tokens = cmd.head.tokens;
    if ( tokens.size() < 3 || tokens.size() > 6 )
      fail( ".latch expects input, output and optional type/control/init", cmd.head );
    auto const d = netlist_.get_or_add_net( tokens[1].text );
    auto const q = drive( tokens[2].text, cmd.head, 2 );
    netlist_.add_cell( GateKind::Dff, { d }, q );
  }

  void build_subckt( Command const& cmd )
  {
    auto const& tokens = cmd.head.tokens;
    if ( tokens.size() < 3 )
      fail( ".subckt expects a model name and pin bindings", cmd.head );
    auto const& type = tokens[1].text;
    std::vector<std::pair<std::string, std::size_t>> bindings; // actual, token index
    std::map<std::string, std::string> by_formal;
    for ( std::size_t i = 2; i < tokens.size(); ++i )
    {
      auto const eq = tokens[i].text.find( '=' );
      if ( eq == std::string::npos || eq == 0 || eq + 1 == tokens[i].text.size() )
        fail( "pin binding must be formal=actual", cmd.head, i );
      auto formal = tokens[i].text.substr( 0, eq );
      auto actual = tokens[i].text.substr( eq + 1 );
      by_formal[formal] = actual;
      bindings.emplace_back( actual, i );
    }

    auto const it = models_by_name_.find( type );
    if ( it == models_by_name_.end() )
    {
      // undefined model: formals in listed order, the last one is the output
      std::vector<NetId> ins;
      for ( std::size_t i = 0; i + 1 < bindings.size(); ++i )
        ins.push_back( netlist_.get_or_add_net( bindings[i].first ) );
      auto const out = drive( bindings.back().first, cmd.head, bindings.back().second );
      netlist_.add_cell( GateKind::Other, std::move( ins ), out, -1, type );
      return;
    }
    auto const& model = *it->second;
    if ( model.outputs.size() != 1 )
      fail( "subcircuit '" + type + "' must have exactly one output", cmd.head, 1 );
    std::vector<NetId> ins;
    for ( auto const& formal : model.inputs )
    {
      auto const b = by_formal.find( formal );
      if ( b == by_formal.end() )
        fail( "pin '" + formal + "' of '" + type + "' is not bound", cmd.head, 1 );
      ins.push_back( netlist_.get_or_add_net( b->second ) );
    }
    auto const b = by_formal.find( model.outputs[0] );
    if ( b == by_formal.end() )
      fail( "output pin of '" + type + "' is not bound", cmd.head, 1 );
    std::size_t out_token = 1;
    for ( auto const& [actual, index] : bindings )
      if ( actual == b->second )
        out_token = index;
    auto const out = drive( b->second, cmd.head, out_token );

    if ( !model.blackbox && !netlist_.cell_functions().contains( type ) )
    {
      if ( auto const fn = model_function( model ) )
        netlist_.register_function( type, *fn );
    }
    netlist_.add_cell( GateKind::Other, std::move( ins ), out, -1, type );
  }

  /// Function of a model whose body is a single `.names` over its inputs.
  static std::optional<TruthTable> model_function( Model const& model )
  {
    if ( model.commands.size() != 1 || model.commands[0].head.tokens[0].text != ".names" )
      return std::nullopt;
    auto const& cmd = model.commands[0];
    if ( cmd.head.tokens.back().text != model.outputs[0] || model.inputs.size() > TruthTable::max_vars )
      return std::nullopt;
    auto const local = cover_function( cmd );
    auto const k = static_cast<std::uint32_t>( model.inputs.size() );
    std::vector<std::uint32_t> position; // .names column -> model input index
    for ( std::size_t i = 1; i + 1 < cmd.head.tokens.size(); ++i )
    {
      auto const p = std::find( model.inputs.begin(), model.inputs.end(), cmd.head.tokens[i].text );
      if ( p == model.inputs.end() )
        return std::nullopt;
      position.push_back( static_cast<std::uint32_t>( p - model.inputs.begin() ) );
    }
    TruthTable tt( k );
    for ( std::uint32_t m = 0; m < tt.num_bits(); ++m )
    {
      std::uint32_t local_m = 0;
      for ( std::size_t i = 0; i < position.size(); ++i )
        local_m |= ( ( m >> position[i] ) & 1u ) << i;
      tt.set_bit( m, local.get_bit( local_m ) );
    }
    return tt;
  }

  Model const& top_;
  std::map<std::string, Model const*> models_by_name_;
  Netlist netlist_;
  std::set<NetId> driven_;
  std::map<NetId, NetId> inverters_;
};

void write_gate_cover( std::ostream& os, Cell const& cell )
{
  auto const k = cell.inputs.size();
  switch ( cell.kind )
  {
  case GateKind::And:
    os << std::string( k, '1' ) << " 1\n";
    break;
  case GateKind::Nand:
    for ( std::size_t i = 0; i < k; ++i )
    {
      std::string row( k, '-' );
      row[i] = '0';
      os << row << " 1\n";
    }
    break;
  case GateKind::Or:
    for ( std::size_t i = 0; i < k; ++i )
    {
      std::string row( k, '-' );
      row[i] = '1';
      os << row << " 1\n";
    }
    break;
  case GateKind::Nor:
    os << std::string( k, '0' ) << " 1\n";
    break;
  case GateKind::Xor:
    os << "01 1\n10 1\n";
    break;
  case GateKind::Xnor:
    os << "00 1\n11 1\n";
    break;
  case GateKind::Inv:
    os << "0 1\n";
    break;
  case GateKind::Buf:
    os << "1 1\n";
    break;
  case GateKind::Const1:
    os << "1\n";
    break;
  case GateKind::Const0:
  case GateKind::Dff:
  case GateKind::Other:
    break;
  }
}

} // namespace

Netlist parse_blif( std::string_view text )
{
  auto const lines = split_lines( text );
  auto const models = split_models( lines );
  std::set<std::string> seen;
  for ( auto const& m : models )
  {
    if ( !seen.insert( m.name ).second )
      throw ParseError( "model '" + m.name + "' defined twice", m.line, 1 );
  }
  return TopBuilder( models.front(), models ).build();
}

std::string write_blif( Netlist const& n )
{
  std::ostringstream os;
  os << ".model " << ( n.name().empty() ? "top" : n.name() ) << '\n';
  os << ".inputs";
  for ( auto const in : n.inputs() )
    os << ' ' << n.net_name( in );
  os << '\n';
  os << ".outputs";
  for ( auto const& port : n.outputs() )
    os << ' ' << port.name;
  os << '\n';

  std::set<std::string> subckt_types;
  for ( auto const& cell : n.cells() )
  {
    if ( cell.kind == GateKind::Dff )
    {
      os << ".latch " << n.net_name( cell.inputs[0] ) << ' ' << n.net_name( cell.output ) << " 0\n";
      continue;
    }
    if ( cell.kind == GateKind::Other )
    {
      os << ".subckt " << cell.type_name;
      for ( std::size_t i = 0; i < cell.inputs.size(); ++i )
        os << " i" << i << '=' << n.net_name( cell.inputs[i] );
      os << " o=" << n.net_name( cell.output ) << '\n';
      subckt_types.insert( cell.type_name );
      continue;
    }
    os << ".names";
    for ( auto const in : cell.inputs )
      os << ' ' << n.net_name( in );
    os << ' ' << n.net_name( cell.output ) << '\n';
    write_gate_cover( os, cell );
  }
  for ( auto const& port : n.outputs() )
  {
    if ( port.name != n.net_name( port.net ) )
      os << ".names " << n.net_name( port.net ) << ' ' << port.name << "\n1 1\n";
  }
  os << ".end\n";

  for ( auto const& type : subckt_types )
  {
    std::size_t arity = 0;
    for ( auto const& cell : n.cells() )
      if ( cell.kind == GateKind::Other && cell.type_name == type )
        arity = cell.inputs.size();
    os << "\n.model " << type << "\n.inputs";
    for ( std::size_t i = 0; i < arity; ++i )
      os << " i" << i;
    os << "\n.outputs o\n";
    auto const fn = n.cell_functions().find( type );
    if ( fn == n.cell_functions().end() )
    {
      os << ".blackbox\n.end\n";
      continue;
    }
    os << ".names";
    for ( std::size_t i = 0; i < arity; ++i )
      os << " i" << i;
    os << " o\n";
    for ( std::uint32_t m = 0; m < fn->second.num_bits(); ++m )
    {
      if ( !fn->second.get_bit( m ) )
        continue;
      for ( std::size_t i = 0; i < arity; ++i )
        os << ( ( ( m >> i ) & 1u ) ? '1' : '0' );
      os << ( arity ? " 1\n" : "1\n" );
    }
    os << ".end\n";
  }
  return os.str();
}

std::string read_text_file( std::filesystem::path const& path )
{
  std::ifstream in( path, std::ios::binary );
  if ( !in )
    throw Error( "cannot open '" + path.string() + "'" );
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file( std::filesystem::path const& path, std::string_view text )
{
  if ( path.has_parent_path() )
    std::filesystem::create_directories( path.parent_path() );
  std::ofstream out( path, std::ios::binary );
  if ( !out )
    throw Error( "cannot write '" + path.string() + "'" );
  out << text;
}

Netlist read_netlist_file( std::filesystem::path const& path )
{
  auto const text = read_text_file( path );
  auto n = path.extension() == ".v" ? parse_structural_verilog( text ) : parse_blif( text );
  return n;
}

} // namespace netforge
