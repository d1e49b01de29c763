#include <netforge/aig.hpp>

#include <netforge/error.hpp>

#include <algorithm>
#include <map>

namespace netforge
{

Aig::Aig()
{
  nodes_.push_back( {} );
  hints_.resize( 2 );
}

Lit Aig::create_pi( std::string name )
{
  if ( num_latches() > 0 )
    throw Error( "primary inputs must be created before latches" );
  auto const index = static_cast<std::uint32_t>( nodes_.size() );
  nodes_.push_back( { NodeKind::Ci, {}, {}, -1 } );
  hints_.resize( 2 * nodes_.size() );
  ci_position_[index] = static_cast<std::uint32_t>( cis_.size() );
  cis_.push_back( index );
  hints_[2 * index] = name;
  ci_names_.push_back( std::move( name ) );
  ++num_pis_;
  return Lit::make( index );
}

Lit Aig::create_latch( std::string name, std::int32_t tag )
{
  auto const index = static_cast<std::uint32_t>( nodes_.size() );
  nodes_.push_back( { NodeKind::Ci, {}, {}, tag } );
  hints_.resize( 2 * nodes_.size() );
  ci_position_[index] = static_cast<std::uint32_t>( cis_.size() );
  cis_.push_back( index );
  hints_[2 * index] = name;
  co_names_.push_back( name );
  cos_.push_back( lit_false );
  ci_names_.push_back( std::move( name ) );
  latch_tags_.push_back( tag );
  return Lit::make( index );
}

void Aig::set_latch_next( std::size_t latch, Lit next )
{
  cos_.at( num_pos_ + latch ) = next;
}

void Aig::create_po( Lit driver, std::string name )
{
  cos_.insert( cos_.begin() + static_cast<std::ptrdiff_t>( num_pos_ ), driver );
  co_names_.insert( co_names_.begin() + static_cast<std::ptrdiff_t>( num_pos_ ), std::move( name ) );
  ++num_pos_;
}

std::optional<Lit> Aig::find_and( Lit a, Lit b ) const
{
  if ( a == lit_false || b == lit_false || a == !b )
    return lit_false;
  if ( a == lit_true )
    return b;
  if ( b == lit_true || a == b )
    return a;
  if ( b < a )
    std::swap( a, b );
  if ( auto const it = strash_.find( key( a, b ) ); it != strash_.end() )
    return Lit::make( it->second );
  return std::nullopt;
}

Lit Aig::create_and( Lit a, Lit b )
{
  if ( auto const existing = find_and( a, b ) )
    return *existing;
  if ( b < a )
    std::swap( a, b );
  auto const index = static_cast<std::uint32_t>( nodes_.size() );
  nodes_.push_back( { NodeKind::And, a, b, current_tag_ } );
  hints_.resize( 2 * nodes_.size() );
  strash_.emplace( key( a, b ), index );
  ++num_ands_;
  return Lit::make( index );
}

Lit Aig::create_xor( Lit a, Lit b )
{
  auto const t0 = create_and( a, !b );
  auto const t1 = create_and( !a, b );
  return create_or( t0, t1 );
}

std::int64_t Aig::ci_index( std::uint32_t node ) const
{
  auto const it = ci_position_.find( node );
  return it == ci_position_.end() ? -1 : static_cast<std::int64_t>( it->second );
}

std::string const& Aig::hint( Lit lit ) const
{
  return hints_[lit.raw()];
}

void Aig::add_hint( Lit lit, std::string const& name )
{
  if ( name.empty() || lit.node() == 0 )
    return;
  auto& slot = hints_[lit.raw()];
  if ( slot.empty() )
    slot = name;
}

Aig Aig::cleanup() const
{
  std::vector<bool> live( nodes_.size(), false );
  for ( auto const co : cos_ )
    live[co.node()] = true;
  for ( auto i = nodes_.size(); i-- > 1; )
  {
    if ( live[i] && nodes_[i].kind == NodeKind::And )
    {
      live[nodes_[i].fanin0.node()] = true;
      live[nodes_[i].fanin1.node()] = true;
    }
  }

  Aig out;
  std::vector<Lit> map( nodes_.size(), lit_false );
  for ( std::size_t i = 0; i < num_pis_; ++i )
    map[cis_[i]] = out.create_pi( ci_names_[i] );
  for ( std::size_t l = 0; l < num_latches(); ++l )
    map[cis_[num_pis_ + l]] = out.create_latch( ci_names_[num_pis_ + l], latch_tags_[l] );
  auto const mapped = [&]( Lit l ) { return map[l.node()] ^ l.complemented(); };
  for ( std::uint32_t i = 1; i < nodes_.size(); ++i )
  {
    if ( !live[i] || nodes_[i].kind != NodeKind::And )
      continue;
    out.set_current_tag( nodes_[i].tag );
    map[i] = out.create_and( mapped( nodes_[i].fanin0 ), mapped( nodes_[i].fanin1 ) );
    if ( out.is_and( map[i].node() ) && out.node( map[i].node() ).tag < 0 )
      out.set_tag( map[i].node(), nodes_[i].tag );
  }
  for ( std::uint32_t i = 1; i < nodes_.size(); ++i )
  {
    if ( !live[i] )
      continue;
    out.add_hint( map[i], hints_[2 * i] );
    out.add_hint( !map[i], hints_[2 * i + 1] );
  }
  out.set_current_tag( -1 );
  for ( std::size_t o = 0; o < num_pos_; ++o )
    out.create_po( mapped( cos_[o] ), co_names_[o] );
  for ( std::size_t l = 0; l < num_latches(); ++l )
    out.set_latch_next( l, mapped( cos_[num_pos_ + l] ) );
  return out;
}

std::vector<std::uint32_t> Aig::levels() const
{
  std::vector<std::uint32_t> level( nodes_.size(), 0 );
  for ( std::uint32_t i = 1; i < nodes_.size(); ++i )
  {
    if ( nodes_[i].kind == NodeKind::And )
      level[i] = 1 + std::max( level[nodes_[i].fanin0.node()], level[nodes_[i].fanin1.node()] );
  }
  return level;
}

std::uint32_t Aig::depth() const
{
  auto const level = levels();
  std::uint32_t d = 0;
  for ( auto const co : cos_ )
    d = std::max( d, level[co.node()] );
  return d;
}

std::vector<std::uint32_t> Aig::fanout_counts() const
{
  std::vector<std::uint32_t> refs( nodes_.size(), 0 );
  for ( auto const& n : nodes_ )
  {
    if ( n.kind == NodeKind::And )
    {
      ++refs[n.fanin0.node()];
      ++refs[n.fanin1.node()];
    }
  }
  for ( auto const co : cos_ )
    ++refs[co.node()];
  return refs;
}

void Aig::check() const
{
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> seen;
  for ( std::uint32_t i = 1; i < nodes_.size(); ++i )
  {
    auto const& n = nodes_[i];
    if ( n.kind != NodeKind::And )
      continue;
    if ( n.fanin0.node() >= i || n.fanin1.node() >= i )
      throw Error( "AIG node " + std::to_string( i ) + " is not in topological order" );
    if ( !seen.emplace( std::pair( n.fanin0.raw(), n.fanin1.raw() ), i ).second )
      throw Error( "AIG nodes share the structural signature of node " + std::to_string( i ) );
  }
  if ( cos_.size() != num_pos_ + num_latches() || cis_.size() != num_pis_ + num_latches() )
    throw Error( "AIG CI/CO bookkeeping is inconsistent" );
  for ( auto const co : cos_ )
  {
    if ( co.node() >= nodes_.size() )
      throw Error( "AIG output refers to a missing node" );
  }
}

namespace
{

/// Sum of products over the cell's inputs, from a truth table, one AND chain per minterm.
Lit synthesize_table( Aig& aig, TruthTable const& tt, std::vector<Lit> const& ins )
{
  Lit result = lit_false;
  for ( std::uint32_t m = 0; m < tt.num_bits(); ++m )
  {
    if ( !tt.get_bit( m ) )
      continue;
    Lit cube = lit_true;
    for ( std::size_t i = 0; i < ins.size(); ++i )
      cube = aig.create_and( cube, ins[i] ^ !( ( m >> i ) & 1u ) );
    result = aig.create_or( result, cube );
  }
  return result;
}

Lit and_chain( Aig& aig, std::vector<Lit> const& ins )
{
  Lit acc = ins[0];
  for ( std::size_t i = 1; i < ins.size(); ++i )
    acc = aig.create_and( acc, ins[i] );
  return acc;
}

Lit or_chain( Aig& aig, std::vector<Lit> const& ins )
{
  Lit acc = ins[0];
  for ( std::size_t i = 1; i < ins.size(); ++i )
    acc = aig.create_or( acc, ins[i] );
  return acc;
}

} // namespace

Aig netlist_to_aig( Netlist const& n )
{
  Aig aig;
  std::vector<std::optional<Lit>> net_lit( n.num_nets() );
  for ( auto const in : n.inputs() )
    net_lit[in] = aig.create_pi( n.net_name( in ) );

  std::vector<CellId> latches;
  for ( CellId c = 0; c < n.num_cells(); ++c )
  {
    auto const& cell = n.cell( c );
    if ( cell.kind == GateKind::Dff )
    {
      net_lit[cell.output] = aig.create_latch( n.net_name( cell.output ), cell.tag );
      latches.push_back( c );
    }
  }

  for ( auto const c : n.topological_order() )
  {
    auto const& cell = n.cell( c );
    if ( cell.kind == GateKind::Dff )
      continue;
    std::vector<Lit> ins;
    for ( auto const in : cell.inputs )
    {
      if ( !net_lit[in] )
        throw DesignRuleError( "net '" + n.net_name( in ) + "' is read but never driven" );
      ins.push_back( *net_lit[in] );
    }
    aig.set_current_tag( cell.tag );
    Lit out;
    switch ( cell.kind )
    {
    case GateKind::And:
      out = and_chain( aig, ins );
      break;
    case GateKind::Nand:
      out = !and_chain( aig, ins );
      break;
    case GateKind::Or:
      out = or_chain( aig, ins );
      break;
    case GateKind::Nor:
      out = !or_chain( aig, ins );
      break;
    case GateKind::Xor:
      out = aig.create_xor( ins[0], ins[1] );
      break;
    case GateKind::Xnor:
      out = !aig.create_xor( ins[0], ins[1] );
      break;
    case GateKind::Inv:
      out = !ins[0];
      break;
    case GateKind::Buf:
      out = ins[0];
      break;
    case GateKind::Const0:
      out = lit_false;
      break;
    case GateKind::Const1:
      out = lit_true;
      break;
    case GateKind::Other:
    {
      auto const fn = n.cell_functions().find( cell.type_name );
      if ( fn == n.cell_functions().end() )
        throw Error( "cell type '" + cell.type_name + "' has no registered function" );
      out = synthesize_table( aig, fn->second, ins );
      break;
    }
    case GateKind::Dff:
      break;
    }
    net_lit[cell.output] = out;
    aig.add_hint( out, n.net_name( cell.output ) );
  }
  aig.set_current_tag( -1 );

  for ( auto const& port : n.outputs() )
  {
    if ( !net_lit[port.net] )
      throw DesignRuleError( "output '" + port.name + "' is undriven" );
    aig.create_po( *net_lit[port.net], port.name );
  }
  for ( std::size_t l = 0; l < latches.size(); ++l )
  {
    auto const d = n.cell( latches[l] ).inputs[0];
    if ( !net_lit[d] )
      throw DesignRuleError( "net '" + n.net_name( d ) + "' is read but never driven" );
    aig.set_latch_next( l, *net_lit[d] );
    aig.add_hint( *net_lit[d], n.net_name( d ) );
  }
  return aig;
}

Netlist aig_to_netlist( Aig const& aig, std::string const& name )
{
  Netlist n( name );
  std::vector<NetId> pos_net( aig.size(), 0 );
  std::vector<std::optional<NetId>> neg_net( aig.size() );
  for ( std::size_t i = 0; i < aig.num_pis(); ++i )
    pos_net[aig.cis()[i]] = n.add_input( aig.ci_name( i ) );
  for ( std::size_t l = 0; l < aig.num_latches(); ++l )
    pos_net[aig.cis()[aig.num_pis() + l]] = n.add_net( aig.ci_name( aig.num_pis() + l ) );

  std::optional<NetId> zero;
  auto net_of = [&]( Lit l ) -> NetId {
    if ( l.node() == 0 )
    {
      if ( !zero )
      {
        zero = n.add_net( n.fresh_net_name( "zero" ) );
        n.add_cell( GateKind::Const0, {}, *zero );
      }
      if ( !l.complemented() )
        return *zero;
    }
    if ( !l.complemented() )
      return pos_net[l.node()];
    auto& slot = neg_net[l.node()];
    if ( !slot )
    {
      slot = n.add_net( n.fresh_net_name( "n" ) );
      auto const src = l.node() == 0 ? *zero : pos_net[l.node()];
      n.add_cell( GateKind::Inv, { src }, *slot, aig.node( l.node() ).tag );
    }
    return *slot;
  };
  for ( std::uint32_t i = 1; i < aig.size(); ++i )
  {
    if ( !aig.is_and( i ) )
      continue;
    auto const a = net_of( aig.node( i ).fanin0 );
    auto const b = net_of( aig.node( i ).fanin1 );
    pos_net[i] = n.add_net( n.fresh_net_name( "n" ) );
    n.add_cell( GateKind::And, { a, b }, pos_net[i], aig.node( i ).tag );
  }
  for ( std::size_t o = 0; o < aig.num_pos(); ++o )
  {
    n.add_output( net_of( aig.cos()[o] ), aig.co_name( o ) );
  }
  for ( std::size_t l = 0; l < aig.num_latches(); ++l )
  {
    auto const d = net_of( aig.cos()[aig.num_pos() + l] );
    n.add_cell( GateKind::Dff, { d }, pos_net[aig.cis()[aig.num_pis() + l]], aig.latch_tag( l ) );
  }
  return n;
}

} // namespace netforge
