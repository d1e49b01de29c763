#include <netforge/generators.hpp>

#include <netforge/error.hpp>

#include <algorithm>
#include <numeric>
#include <random>

namespace netforge
{

namespace
{

std::vector<std::size_t> sample( std::size_t n, std::size_t k, std::mt19937_64& rng )
{
  std::vector<std::size_t> idx( n );
  std::iota( idx.begin(), idx.end(), 0 );
  std::shuffle( idx.begin(), idx.end(), rng );
  idx.resize( k );
  std::sort( idx.begin(), idx.end() );
  return idx;
}

/// Moves the driver of `net` onto a fresh net, leaving `net` undriven for a new
/// cell. With `bypass`, cell readers switch to the fresh net too.
NetId split_net( Netlist& n, NetId net, CellId driver, std::string_view hint, bool bypass )
{
  auto const moved = n.add_net( n.fresh_net_name( hint ) );
  n.set_cell_output( driver, moved );
  if ( !bypass )
    return moved;
  for ( CellId c = 0; c < n.num_cells(); ++c )
  {
    auto const& ins = n.cell( c ).inputs;
    for ( std::size_t p = 0; p < ins.size(); ++p )
    {
      if ( ins[p] == net )
        n.set_cell_input( c, p, moved );
    }
  }
  return moved;
}

void tag_all( Netlist& n, std::int32_t tag )
{
  for ( CellId c = 0; c < n.num_cells(); ++c )
    n.set_cell_tag( c, tag );
}

constexpr std::array<std::string_view, 5> block_names = { "ADD", "SUB", "CMP", "MUL", "CTRL" };

class BlockBuilder
{
public:
  explicit BlockBuilder( Netlist& n ) : n_( n ) {}

  void set_tag( std::int32_t tag ) { tag_ = tag; }

  NetId gate( GateKind kind, std::vector<NetId> ins )
  {
    auto const out = n_.add_net( n_.fresh_net_name( "b" ) );
    n_.add_cell( kind, std::move( ins ), out, tag_ );
    return out;
  }
  NetId inv( NetId a ) { return gate( GateKind::Inv, { a } ); }
  NetId and2( NetId a, NetId b ) { return gate( GateKind::And, { a, b } ); }
  NetId or2( NetId a, NetId b ) { return gate( GateKind::Or, { a, b } ); }
  NetId xor2( NetId a, NetId b ) { return gate( GateKind::Xor, { a, b } ); }
  NetId xnor2( NetId a, NetId b ) { return gate( GateKind::Xnor, { a, b } ); }

  /// Returns (sum, carry).
  std::pair<NetId, NetId> full_add( NetId a, NetId b, NetId c )
  {
    auto const p = xor2( a, b );
    auto const s = xor2( p, c );
    auto const co = or2( and2( a, b ), and2( p, c ) );
    return { s, co };
  }
  std::pair<NetId, NetId> half_add( NetId a, NetId b ) { return { xor2( a, b ), and2( a, b ) }; }

  /// Ripple sum of x and y (y may be shorter); result has max(len) + 1 bits.
  std::vector<NetId> add( std::vector<NetId> const& x, std::vector<NetId> const& y )
  {
    std::vector<NetId> out;
    std::optional<NetId> carry;
    for ( std::size_t i = 0; i < x.size(); ++i )
    {
      if ( i < y.size() )
      {
        auto const [s, c] = carry ? full_add( x[i], y[i], *carry ) : half_add( x[i], y[i] );
        out.push_back( s );
        carry = c;
      }
      else if ( carry )
      {
        auto const [s, c] = half_add( x[i], *carry );
        out.push_back( s );
        carry = c;
      }
      else
      {
        out.push_back( x[i] );
      }
    }
    if ( carry )
      out.push_back( *carry );
    return out;
  }

  void output( NetId net, std::string const& name )
  {
    n_.rename_net( net, name );
    n_.add_output( net );
  }

private:
  Netlist& n_;
  std::int32_t tag_ = -1;
};

} // namespace

NodeLabels labels_from_tags( Netlist const& netlist, std::vector<std::string> const& names )
{
  NodeLabels labels( netlist.num_cells() );
  for ( CellId c = 0; c < netlist.num_cells(); ++c )
  {
    auto const t = netlist.cell( c ).tag;
    if ( t >= 0 && static_cast<std::size_t>( t ) < names.size() )
      labels[c] = names[static_cast<std::size_t>( t )];
  }
  return labels;
}

std::vector<std::string> trojan_label_names()
{
  return { std::string( label_free ), std::string( label_ht ) };
}

std::vector<std::string> re_label_names()
{
  return { block_names.begin(), block_names.end() };
}

NodeLabels trojan_truth( Netlist const& netlist )
{
  return labels_from_tags( netlist, trojan_label_names() );
}

NodeLabels re_truth( Netlist const& netlist )
{
  return labels_from_tags( netlist, re_label_names() );
}

void tags_from_labels( Netlist& netlist, NodeLabels const& labels, std::vector<std::string> const& names )
{
  if ( labels.size() != netlist.num_cells() )
    throw Error( "label count does not match cell count" );
  for ( CellId c = 0; c < netlist.num_cells(); ++c )
  {
    std::int32_t tag = -1;
    if ( !labels[c].empty() )
    {
      auto const it = std::find( names.begin(), names.end(), labels[c] );
      if ( it == names.end() )
        throw Error( "unknown label '" + labels[c] + "'" );
      tag = static_cast<std::int32_t>( it - names.begin() );
    }
    netlist.set_cell_tag( c, tag );
  }
}

Aig random_aig( std::uint32_t pis, std::uint32_t ands, std::uint32_t pos, std::uint64_t seed )
{
  std::mt19937_64 rng( seed );
  Aig aig;
  std::vector<Lit> signals;
  for ( std::uint32_t i = 0; i < pis; ++i )
    signals.push_back( aig.create_pi( "x" + std::to_string( i ) ) );
  for ( std::uint32_t i = 0; i < ands; ++i )
  {
    auto const a = signals[rng() % signals.size()] ^ static_cast<bool>( rng() & 1u );
    auto const b = signals[rng() % signals.size()] ^ static_cast<bool>( rng() & 1u );
    signals.push_back( aig.create_and( a, b ) );
  }
  for ( std::uint32_t o = 0; o < pos; ++o )
  {
    auto const span = std::min<std::size_t>( signals.size(), 2 * pos + 4 );
    auto const s = signals[signals.size() - 1 - rng() % span];
    aig.create_po( s ^ static_cast<bool>( rng() & 1u ), "y" + std::to_string( o ) );
  }
  return aig.cleanup();
}

TrojanInstance gen_trojan( Netlist const& host, unsigned trigger_width, std::uint64_t seed )
{
  if ( trigger_width == 0 || trigger_width > host.inputs().size() )
    throw Error( "trigger width " + std::to_string( trigger_width ) + " exceeds the " +
                 std::to_string( host.inputs().size() ) + " host inputs" );
  auto const drivers = host.drivers();
  std::vector<std::size_t> candidates;
  for ( std::size_t o = 0; o < host.outputs().size(); ++o )
  {
    if ( drivers[host.outputs()[o].net] )
      candidates.push_back( o );
  }
  if ( candidates.empty() )
    throw Error( "host has no cell-driven output for the payload" );

  std::mt19937_64 rng( seed );
  TrojanInstance t{ host, {}, {}, {}, {} };
  auto& n = t.netlist;
  tag_all( n, tag_free );

  auto const picked = sample( host.inputs().size(), trigger_width, rng );
  for ( std::size_t i = 0; i < trigger_width; ++i )
    t.trigger_pattern.push_back( rng() & 1u );
  if ( std::none_of( t.trigger_pattern.begin(), t.trigger_pattern.end(), []( bool b ) { return b; } ) )
    t.trigger_pattern[rng() % trigger_width] = true;

  std::vector<NetId> literals;
  for ( std::size_t i = 0; i < trigger_width; ++i )
  {
    auto const pi = host.inputs()[picked[i]];
    t.trigger_inputs.push_back( host.net_name( pi ) );
    if ( t.trigger_pattern[i] )
    {
      literals.push_back( pi );
      continue;
    }
    auto const neg = n.add_net( n.fresh_net_name( "t" ) );
    n.add_cell( GateKind::Inv, { pi }, neg, tag_ht );
    literals.push_back( neg );
  }
  while ( literals.size() > 1 )
  {
    std::vector<NetId> next;
    for ( std::size_t i = 0; i + 1 < literals.size(); i += 2 )
    {
      auto const out = n.add_net( n.fresh_net_name( "t" ) );
      n.add_cell( GateKind::And, { literals[i], literals[i + 1] }, out, tag_ht );
      next.push_back( out );
    }
    if ( literals.size() % 2 )
      next.push_back( literals.back() );
    literals = std::move( next );
  }

  auto const port = candidates[rng() % candidates.size()];
  auto const victim = host.outputs()[port].net;
  t.payload_output = host.outputs()[port].name;
  auto const moved = split_net( n, victim, *drivers[victim], "t", true );
  for ( std::size_t o = 0; o < n.outputs().size(); ++o )
  {
    if ( o != port && n.outputs()[o].net == victim )
      n.set_output_net( o, moved );
  }
  n.add_cell( GateKind::Xor, { moved, literals.front() }, victim, tag_ht );
  require_valid( n );
  t.truth = trojan_truth( n );
  return t;
}

ObfuscatedInstance gen_obfuscated( Netlist const& netlist, unsigned n_keys, std::uint64_t seed )
{
  auto const drivers = netlist.drivers();
  std::vector<NetId> eligible;
  for ( NetId net = 0; net < netlist.num_nets(); ++net )
  {
    if ( !drivers[net] )
      continue;
    auto const kind = netlist.cell( *drivers[net] ).kind;
    if ( kind != GateKind::Const0 && kind != GateKind::Const1 )
      eligible.push_back( net );
  }
  if ( n_keys > eligible.size() )
    throw Error( "only " + std::to_string( eligible.size() ) + " nets can take a key gate, " +
                 std::to_string( n_keys ) + " requested" );

  std::mt19937_64 rng( seed );
  ObfuscatedInstance o{ netlist, {}, {}, {} };
  auto& n = o.netlist;
  tag_all( n, tag_free );
  auto const picked = sample( eligible.size(), n_keys, rng );
  o.key.assign( n_keys, false );
  std::fill( o.key.begin(), o.key.begin() + n_keys / 2, true );
  std::shuffle( o.key.begin(), o.key.end(), rng );

  for ( unsigned i = 0; i < n_keys; ++i )
  {
    auto const net = eligible[picked[i]];
    std::string name = "keyinput" + std::to_string( i );
    if ( n.has_net( name ) )
      name = n.fresh_net_name( "key" );
    auto const key = n.add_input( name );
    o.key_inputs.push_back( name );
    auto const moved = split_net( n, net, *drivers[net], "k", false );
    auto const gate = n.add_cell( o.key[i] ? GateKind::Xnor : GateKind::Xor, { moved, key }, net, tag_key_gate );
    o.key_gates.push_back( { gate, o.key[i] } );
  }
  require_valid( n );
  return o;
}

Netlist apply_key( Netlist const& netlist, std::vector<std::string> const& key_inputs, std::vector<bool> const& key )
{
  if ( key_inputs.size() != key.size() )
    throw Error( "key length does not match the key inputs" );
  Netlist out( netlist.name() );
  for ( NetId net = 0; net < netlist.num_nets(); ++net )
    out.add_net( netlist.net_name( net ) );
  std::map<NetId, bool> tied;
  for ( std::size_t i = 0; i < key.size(); ++i )
  {
    auto const net = netlist.find_net( key_inputs[i] );
    if ( !net || !netlist.is_input( *net ) )
      throw Error( "'" + key_inputs[i] + "' is not an input" );
    tied[*net] = key[i];
  }
  for ( auto const net : netlist.inputs() )
  {
    if ( !tied.contains( net ) )
      out.add_input_net( net );
  }
  for ( auto const& [type, f] : netlist.cell_functions() )
    out.register_function( type, f );
  for ( auto const& c : netlist.cells() )
    out.add_cell( c.kind, c.inputs, c.output, c.tag, c.type_name );
  for ( auto const& [net, bit] : tied )
    out.add_cell( bit ? GateKind::Const1 : GateKind::Const0, {}, net );
  for ( auto const& p : netlist.outputs() )
    out.add_output( p.net, p.name );
  return out;
}

std::string_view to_string( BlockKind kind )
{
  return block_names.at( static_cast<std::size_t>( kind ) );
}

std::optional<BlockKind> block_kind_from_string( std::string_view name )
{
  for ( std::size_t i = 0; i < block_names.size(); ++i )
  {
    if ( block_names[i] == name )
      return static_cast<BlockKind>( i );
  }
  return std::nullopt;
}

ReInstance gen_re_blocks( std::vector<unsigned> const& widths, std::vector<BlockKind> const& kinds,
                          std::uint64_t seed )
{
  if ( kinds.empty() )
    throw Error( "no block kinds requested" );
  if ( widths.size() != 1 && widths.size() != kinds.size() )
    throw Error( "give one width or one width per block" );
  for ( auto const w : widths )
  {
    if ( w != 2 && w != 4 && w != 8 )
      throw Error( "unsupported block width " + std::to_string( w ) );
  }
  auto width_of = [&]( std::size_t i ) { return widths.size() == 1 ? widths[0] : widths[i]; };
  unsigned const max_w = *std::max_element( widths.begin(), widths.end() );

  std::mt19937_64 rng( seed );
  ReInstance r;
  auto& n = r.netlist;
  n.set_name( "re_blocks" );
  std::vector<NetId> a, b;
  for ( unsigned i = 0; i < max_w; ++i )
    a.push_back( n.add_input( "a" + std::to_string( i ) ) );
  for ( unsigned i = 0; i < max_w; ++i )
    b.push_back( n.add_input( "b" + std::to_string( i ) ) );
  std::optional<NetId> cin, sel;
  if ( std::find( kinds.begin(), kinds.end(), BlockKind::Add ) != kinds.end() )
    cin = n.add_input( "cin" );
  if ( std::find( kinds.begin(), kinds.end(), BlockKind::Ctrl ) != kinds.end() )
    sel = n.add_input( "sel" );

  BlockBuilder bb( n );
  for ( std::size_t k = 0; k < kinds.size(); ++k )
  {
    auto const w = width_of( k );
    std::vector<NetId> x( a.begin(), a.begin() + w ), y( b.begin(), b.begin() + w );
    if ( rng() & 1u )
      std::swap( x, y );
    bb.set_tag( static_cast<std::int32_t>( kinds[k] ) );
    std::string prefix( to_string( kinds[k] ) );
    std::transform( prefix.begin(), prefix.end(), prefix.begin(), []( unsigned char c ) { return std::tolower( c ); } );
    prefix += std::to_string( k ) + "_";

    switch ( kinds[k] )
    {
    case BlockKind::Add:
    {
      NetId carry = *cin;
      for ( unsigned i = 0; i < w; ++i )
      {
        auto const [s, c] = bb.full_add( x[i], y[i], carry );
        bb.output( s, prefix + "s" + std::to_string( i ) );
        carry = c;
      }
      bb.output( carry, prefix + "cout" );
      break;
    }
    case BlockKind::Sub:
    {
      std::vector<NetId> ny;
      for ( auto const v : y )
        ny.push_back( bb.inv( v ) );
      // carry-in of 1 folded into bit 0
      bb.output( bb.xnor2( x[0], ny[0] ), prefix + "d0" );
      NetId carry = bb.or2( x[0], ny[0] );
      for ( unsigned i = 1; i < w; ++i )
      {
        auto const [s, c] = bb.full_add( x[i], ny[i], carry );
        bb.output( s, prefix + "d" + std::to_string( i ) );
        carry = c;
      }
      bb.output( carry, prefix + "nb" );
      break;
    }
    case BlockKind::Cmp:
    {
      NetId eq = bb.xnor2( x[0], y[0] );
      for ( unsigned i = 1; i < w; ++i )
        eq = bb.and2( eq, bb.xnor2( x[i], y[i] ) );
      bb.output( eq, prefix + "eq" );
      break;
    }
    case BlockKind::Mul:
    {
      std::vector<NetId> acc;
      for ( unsigned j = 0; j < w; ++j )
        acc.push_back( bb.and2( x[0], y[j] ) );
      std::vector<NetId> product{ acc.front() };
      acc.erase( acc.begin() );
      for ( unsigned i = 1; i < w; ++i )
      {
        std::vector<NetId> row;
        for ( unsigned j = 0; j < w; ++j )
          row.push_back( bb.and2( x[i], y[j] ) );
        acc = acc.size() >= row.size() ? bb.add( acc, row ) : bb.add( row, acc );
        product.push_back( acc.front() );
        acc.erase( acc.begin() );
      }
      product.insert( product.end(), acc.begin(), acc.end() );
      for ( std::size_t i = 0; i < product.size(); ++i )
        bb.output( product[i], prefix + "p" + std::to_string( i ) );
      break;
    }
    case BlockKind::Ctrl:
    {
      auto const ns = bb.inv( *sel );
      for ( unsigned i = 0; i < w; ++i )
        bb.output( bb.or2( bb.and2( *sel, x[i] ), bb.and2( ns, y[i] ) ), prefix + "y" + std::to_string( i ) );
      break;
    }
    }
  }
  require_valid( n );
  r.truth = re_truth( n );
  return r;
}

} // namespace netforge
