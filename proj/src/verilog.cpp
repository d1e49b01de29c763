#include <netforge/io.hpp>

#include <netforge/error.hpp>

#include <cctype>
#include <map>
#include <set>

namespace netforge
{

namespace
{

struct Tok
{
  enum Kind
  {
    Ident,
    Punct,
    End
  } kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

class Lexer
{
public:
  explicit Lexer( std::string_view text ) : text_( text ) {}

  std::vector<Tok> run()
  {
    std::vector<Tok> toks;
    while ( true )
    {
      skip_space_and_comments();
      if ( pos_ >= text_.size() )
      {
        toks.push_back( { Tok::End, "", line_, column() } );
        return toks;
      }
      auto const start_line = line_;
      auto const start_col = column();
      char const c = text_[pos_];
      if ( c == '\\' )
      {
        // escaped identifier runs to the next whitespace
        auto const start = ++pos_;
        while ( pos_ < text_.size() && !std::isspace( static_cast<unsigned char>( text_[pos_] ) ) )
          ++pos_;
        toks.push_back( { Tok::Ident, std::string( text_.substr( start, pos_ - start ) ), start_line, start_col } );
      }
      else if ( std::isalpha( static_cast<unsigned char>( c ) ) || c == '_' || c == '$' )
      {
        auto const start = pos_;
        while ( pos_ < text_.size() && ( std::isalnum( static_cast<unsigned char>( text_[pos_] ) ) || text_[pos_] == '_' ||
                                         text_[pos_] == '$' ) )
          ++pos_;
        toks.push_back( { Tok::Ident, std::string( text_.substr( start, pos_ - start ) ), start_line, start_col } );
      }
      else if ( std::isdigit( static_cast<unsigned char>( c ) ) )
      {
        auto const start = pos_;
        while ( pos_ < text_.size() &&
                ( std::isalnum( static_cast<unsigned char>( text_[pos_] ) ) || text_[pos_] == '\'' || text_[pos_] == '_' ) )
          ++pos_;
        toks.push_back( { Tok::Ident, std::string( text_.substr( start, pos_ - start ) ), start_line, start_col } );
      }
      else
      {
        ++pos_;
        toks.push_back( { Tok::Punct, std::string( 1, c ), start_line, start_col } );
      }
    }
  }

private:
  std::size_t column() const { return pos_ - line_start_ + 1; }

  void advance()
  {
    if ( text_[pos_] == '\n' )
    {
      ++line_;
      line_start_ = pos_ + 1;
    }
    ++pos_;
  }

  void skip_space_and_comments()
  {
    while ( pos_ < text_.size() )
    {
      if ( std::isspace( static_cast<unsigned char>( text_[pos_] ) ) )
      {
        advance();
      }
      else if ( text_.compare( pos_, 2, "//" ) == 0 )
      {
        while ( pos_ < text_.size() && text_[pos_] != '\n' )
          advance();
      }
      else if ( text_.compare( pos_, 2, "/*" ) == 0 )
      {
        auto const l = line_, c = column();
        pos_ += 2;
        while ( pos_ < text_.size() && text_.compare( pos_, 2, "*/" ) != 0 )
          advance();
        if ( pos_ >= text_.size() )
          throw ParseError( "unterminated block comment", l, c );
        pos_ += 2;
      }
      else
      {
        return;
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t line_start_ = 0;
};

std::map<std::string, GateKind> const primitives = {
    { "and", GateKind::And }, { "or", GateKind::Or },   { "nand", GateKind::Nand }, { "nor", GateKind::Nor },
    { "xor", GateKind::Xor }, { "xnor", GateKind::Xnor }, { "not", GateKind::Inv }, { "buf", GateKind::Buf } };

std::set<std::string> const behavioral = { "assign", "always", "initial", "reg",      "function", "task",
                                           "if",     "case",   "generate", "parameter", "localparam", "integer" };

class Parser
{
public:
  explicit Parser( std::vector<Tok> toks ) : toks_( std::move( toks ) ) {}

  Netlist run()
  {
    expect_ident( "module" );
    auto const name = ident( "module name" );
    netlist_.set_name( name );
    if ( peek( "(" ) )
    {
      next();
      while ( !peek( ")" ) )
      {
        header_ports_.push_back( ident( "port name" ) );
        if ( peek( "," ) )
          next();
      }
      next();
    }
    expect( ";" );

    while ( !( cur().kind == Tok::Ident && cur().text == "endmodule" ) )
    {
      if ( cur().kind == Tok::End )
        fail( "missing endmodule" );
      statement();
    }
    finish();
    return std::move( netlist_ );
  }

private:
  Tok const& cur() const { return toks_[pos_]; }
  Tok const& next() { return toks_[pos_++]; }
  bool peek( std::string_view p ) const { return cur().text == p && cur().kind != Tok::End; }

  [[noreturn]] void fail( std::string const& message ) const
  {
    throw ParseError( message, cur().line, cur().column );
  }

  void expect( std::string_view p )
  {
    if ( !peek( p ) )
      fail( "expected '" + std::string( p ) + "' but found '" + cur().text + "'" );
    next();
  }

  void expect_ident( std::string_view word )
  {
    if ( cur().kind != Tok::Ident || cur().text != word )
      fail( "expected '" + std::string( word ) + "'" );
    next();
  }

  std::string ident( std::string_view what )
  {
    if ( cur().kind != Tok::Ident )
      fail( "expected " + std::string( what ) + " but found '" + cur().text + "'" );
    return next().text;
  }

  void declaration( std::string const& keyword )
  {
    if ( peek( "[" ) )
      fail( "unsupported construct: vector declaration" );
    while ( true )
    {
      auto const name = ident( "signal name" );
      if ( !declared_.insert( name ).second && keyword != "wire" )
        fail( "signal '" + name + "' declared twice" );
      if ( keyword == "input" )
        input_order_.push_back( name );
      else if ( keyword == "output" )
        output_order_.push_back( name );
      if ( peek( "," ) )
      {
        next();
        continue;
      }
      break;
    }
    expect( ";" );
  }

  std::string signal()
  {
    auto const& t = cur();
    if ( t.kind != Tok::Ident )
      fail( "expected a signal name but found '" + t.text + "'" );
    if ( t.text == "1'b0" || t.text == "1'b1" )
    {
      next();
      return constant_net( t.text == "1'b1" );
    }
    if ( !declared_.contains( t.text ) )
      fail( "undeclared wire '" + t.text + "'" );
    if ( toks_[pos_ + 1].text == "[" )
      fail( "unsupported construct: bit select" );
    return next().text;
  }

  std::string constant_net( bool value )
  {
    auto& slot = value ? const1_ : const0_;
    if ( slot.empty() )
    {
      slot = netlist_.fresh_net_name( value ? "one" : "zero" );
      pending_.push_back( { value ? GateKind::Const1 : GateKind::Const0, {}, slot, 0, 0 } );
    }
    return slot;
  }

  void statement()
  {
    auto const& t = cur();
    if ( t.kind != Tok::Ident )
      fail( "unexpected '" + t.text + "'" );
    if ( t.text == "input" || t.text == "output" || t.text == "wire" )
    {
      auto const kw = next().text;
      declaration( kw );
      return;
    }
    if ( behavioral.contains( t.text ) )
      fail( "unsupported construct '" + t.text + "'" );

    auto const line = t.line, column = t.column;
    auto const cell_type = next().text;
    if ( cell_type == "dff" || cell_type == "DFF" )
    {
      dff( line, column );
      return;
    }
    auto const prim = primitives.find( cell_type );
    if ( prim == primitives.end() )
      throw ParseError( "unsupported construct: unknown cell type '" + cell_type + "'", line, column );
    if ( cur().kind == Tok::Ident )
      next(); // instance name
    expect( "(" );
    std::vector<std::string> pins;
    while ( true )
    {
      if ( peek( "." ) )
        fail( "named pins are not supported on primitive gates" );
      pins.push_back( signal() );
      if ( peek( "," ) )
      {
        next();
        continue;
      }
      break;
    }
    expect( ")" );
    expect( ";" );
    if ( pins.size() < 2 )
      throw ParseError( cell_type + " needs an output and at least one input", line, column );
    auto const kind = prim->second;
    std::vector<std::string> ins( pins.begin() + 1, pins.end() );
    if ( !arity_ok( kind, ins.size() ) )
      throw ParseError( "arity mismatch: " + cell_type + " with " + std::to_string( ins.size() ) + " inputs", line,
                        column );
    pending_.push_back( { kind, std::move( ins ), pins[0], line, column } );
  }

  void dff( std::size_t line, std::size_t column )
  {
    if ( cur().kind == Tok::Ident )
      next();
    expect( "(" );
    std::string d, q;
    if ( peek( "." ) )
    {
      while ( true )
      {
        expect( "." );
        auto const pin = ident( "pin name" );
        expect( "(" );
        auto const sig = signal();
        expect( ")" );
        if ( pin == "D" )
          d = sig;
        else if ( pin == "Q" )
          q = sig;
        else if ( pin != "CK" && pin != "CLK" && pin != "C" )
          throw ParseError( "unknown dff pin '" + pin + "'", line, column );
        if ( peek( "," ) )
        {
          next();
          continue;
        }
        break;
      }
    }
    else
    {
      std::vector<std::string> pins;
      while ( true )
      {
        pins.push_back( signal() );
        if ( peek( "," ) )
        {
          next();
          continue;
        }
        break;
      }
      if ( pins.size() != 3 )
        throw ParseError( "arity mismatch: dff expects (CK, Q, D)", line, column );
      q = pins[1];
      d = pins[2];
    }
    expect( ")" );
    expect( ";" );
    if ( d.empty() || q.empty() )
      throw ParseError( "dff needs both D and Q", line, column );
    pending_.push_back( { GateKind::Dff, { d }, q, line, column } );
  }

  void finish()
  {
    for ( auto const& p : header_ports_ )
    {
      if ( !declared_.contains( p ) )
        fail( "port '" + p + "' has no direction declaration" );
    }
    for ( auto const& in : input_order_ )
      netlist_.add_input( in );
    std::set<NetId> driven( netlist_.inputs().begin(), netlist_.inputs().end() );
    for ( auto const& cell : pending_ )
    {
      std::vector<NetId> ins;
      for ( auto const& s : cell.inputs )
        ins.push_back( netlist_.get_or_add_net( s ) );
      auto const out = netlist_.get_or_add_net( cell.output );
      if ( !driven.insert( out ).second )
        throw DesignRuleError( "line " + std::to_string( cell.line ) + ", column " + std::to_string( cell.column ) +
                               ": net '" + cell.output + "' has more than one driver" );
      netlist_.add_cell( cell.kind, std::move( ins ), out );
    }
    for ( auto const& out : output_order_ )
      netlist_.add_output( netlist_.get_or_add_net( out ) );
    require_valid( netlist_ );
  }

  struct Pending
  {
    GateKind kind;
    std::vector<std::string> inputs;
    std::string output;
    std::size_t line;
    std::size_t column;
  };

  std::vector<Tok> toks_;
  std::size_t pos_ = 0;
  Netlist netlist_;
  std::vector<std::string> header_ports_;
  std::set<std::string> declared_;
  std::vector<std::string> input_order_;
  std::vector<std::string> output_order_;
  std::vector<Pending> pending_;
  std::string const0_, const1_;
};

} // namespace

Netlist parse_structural_verilog( std::string_view text )
{
  return Parser( Lexer( text ).run() ).run();
}

} // namespace netforge
