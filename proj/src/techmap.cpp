#include <netforge/techmap.hpp>

#include <netforge/error.hpp>
#include <netforge/transforms.hpp>

#include "window.hpp"

#include <algorithm>
#include <limits>
#include <set>

namespace netforge
{

namespace
{

constexpr std::array<std::string_view, num_actions> action_names = { "a1", "a2", "a3", "a4", "a5", "a6",
                                                                     "a7", "a8", "a9", "a10", "noop" };

constexpr std::array<std::string_view, num_cell_families> family_names = { "AND2/OR2",   "NAND2/NOR2",
                                                                           "ANDx/ORx",   "NANDx/NORx",
                                                                           "XOR/XNOR",   "INV/BUF" };

// columns: AND2/OR2, NAND2/NOR2, ANDx/ORx, NANDx/NORx, XOR/XNOR, INV/BUF
constexpr std::array<std::array<bool, num_cell_families>, 10> table = { {
    { 1, 1, 0, 0, 1, 1 },
    { 1, 1, 1, 1, 1, 1 },
    { 0, 1, 0, 0, 0, 1 },
    { 0, 1, 0, 1, 0, 1 },
    { 0, 1, 0, 0, 1, 1 },
    { 0, 1, 0, 1, 1, 1 },
    { 1, 0, 0, 0, 1, 1 },
    { 1, 0, 1, 0, 1, 1 },
    { 1, 0, 0, 0, 0, 1 },
    { 1, 0, 1, 0, 0, 1 },
} };

} // namespace

std::string_view to_string( ActionId action )
{
  return action_names.at( index_of( action ) );
}

std::optional<ActionId> action_from_string( std::string_view name )
{
  std::string lower( name );
  std::transform( lower.begin(), lower.end(), lower.begin(), []( unsigned char c ) { return std::tolower( c ); } );
  for ( std::size_t i = 0; i < num_actions; ++i )
  {
    if ( action_names[i] == lower )
      return action_from_index( i );
  }
  return std::nullopt;
}

CellLibrary::CellLibrary( std::array<bool, num_cell_families> allowed, std::uint32_t max_wide_fanin )
    : allowed_( allowed ), max_wide_fanin_( max_wide_fanin )
{
  if ( !allows( CellFamily::InvBuf ) )
    throw Error( "cell library must allow INV/BUF" );
  if ( !allows( CellFamily::Nand2Nor2 ) && !allows( CellFamily::And2Or2 ) )
    throw Error( "cell library has no universal basis" );
  if ( max_wide_fanin < 3 || max_wide_fanin > 8 )
    throw Error( "max_wide_fanin must be between 3 and 8" );
}

bool CellLibrary::allows( GateType type ) const
{
  switch ( type.kind )
  {
  case GateKind::And:
  case GateKind::Or:
    return type.fan_in == 2 ? allows( CellFamily::And2Or2 )
                            : type.fan_in > 2 && type.fan_in <= max_wide_fanin_ && allows( CellFamily::AndOrWide );
  case GateKind::Nand:
  case GateKind::Nor:
    return type.fan_in == 2 ? allows( CellFamily::Nand2Nor2 )
                            : type.fan_in > 2 && type.fan_in <= max_wide_fanin_ && allows( CellFamily::NandNorWide );
  case GateKind::Xor:
  case GateKind::Xnor:
    return allows( CellFamily::XorXnor );
  case GateKind::Inv:
  case GateKind::Buf:
    return allows( CellFamily::InvBuf );
  case GateKind::Const0:
  case GateKind::Const1:
  case GateKind::Dff:
    return true;
  case GateKind::Other:
    return false;
  }
  return false;
}

std::string CellLibrary::describe() const
{
  std::string s;
  for ( std::size_t f = 0; f < num_cell_families; ++f )
  {
    if ( !allowed_[f] )
      continue;
    if ( !s.empty() )
      s += ' ';
    s += family_names[f];
  }
  return s;
}

CellLibrary library_for_action( ActionId action )
{
  if ( action == ActionId::Noop )
    throw Error( "the no-op action has no cell library" );
  return CellLibrary( table[index_of( action )] );
}

namespace
{

struct Option
{
  enum Kind : std::uint8_t
  {
    Unset,
    Gate,
    Inverter,
    /// Four NAND2 (XOR) or four NOR2 (XNOR) cells; `gate` says which.
    XorMacro
  } kind = Unset;
  GateKind gate = GateKind::And;
  /// Signals feeding the cell: node and required polarity.
  std::vector<Lit> inputs;
  std::vector<std::uint32_t> covered;
  double cost = std::numeric_limits<double>::infinity();
};

class Mapper
{
public:
  Mapper( Aig const& aig, CellLibrary const& lib, std::string const& name )
      : aig_( aig ), lib_( lib ), out_( name ), refs_( aig.fanout_counts() ), best_( aig.size() ),
        cost_( aig.size(), { 0.0, 0.0 } ), nets_( aig.size() )
  {
  }

  Netlist run()
  {
    compute_costs();
    for ( std::size_t i = 0; i < aig_.num_pis(); ++i )
      nets_[aig_.cis()[i]][0] = out_.add_input( aig_.ci_name( i ) );
    for ( std::size_t l = 0; l < aig_.num_latches(); ++l )
      nets_[aig_.cis()[aig_.num_pis() + l]][0] = out_.add_net( aig_.ci_name( aig_.num_pis() + l ) );
    for ( std::size_t o = 0; o < aig_.num_pos(); ++o )
      reserved_.insert( aig_.co_name( o ) );

    std::set<NetId> port_nets;
    for ( std::size_t o = 0; o < aig_.num_pos(); ++o )
    {
      auto const lit = aig_.cos()[o];
      auto const& port = aig_.co_name( o );
      if ( lit.node() == 0 )
      {
        auto const net = out_.add_net( out_.has_net( port ) ? out_.fresh_net_name( "const" ) : port );
        out_.add_cell( lit.complemented() ? GateKind::Const1 : GateKind::Const0, {}, net );
        out_.add_output( net, port );
        port_nets.insert( net );
        continue;
      }
      auto const net = realize( lit.node(), lit.complemented() );
      if ( out_.net_name( net ) == port )
      {
        out_.add_output( net, port );
        port_nets.insert( net );
        continue;
      }
      bool const is_ci = aig_.is_ci( lit.node() ) && !lit.complemented();
      if ( !is_ci && !port_nets.contains( net ) && !out_.has_net( port ) )
      {
        out_.rename_net( net, port );
        out_.add_output( net, port );
        port_nets.insert( net );
        continue;
      }
      auto const buf = out_.add_net( out_.has_net( port ) ? out_.fresh_net_name( "po" ) : port );
      out_.add_cell( GateKind::Buf, { net }, buf, aig_.node( lit.node() ).tag );
      out_.add_output( buf, port );
      port_nets.insert( buf );
    }
    for ( std::size_t l = 0; l < aig_.num_latches(); ++l )
    {
      auto const lit = aig_.cos()[aig_.num_pos() + l];
      NetId d;
      if ( lit.node() == 0 )
      {
        d = out_.add_net( out_.fresh_net_name( "const" ) );
        out_.add_cell( lit.complemented() ? GateKind::Const1 : GateKind::Const0, {}, d );
      }
      else
      {
        d = realize( lit.node(), lit.complemented() );
      }
      out_.add_cell( GateKind::Dff, { d }, *nets_[aig_.cis()[aig_.num_pis() + l]][0], aig_.latch_tag( l ) );
    }
    return std::move( out_ );
  }

private:
  double flow( Lit l ) const
  {
    return cost_[l.node()][l.complemented()] / std::max<std::uint32_t>( 1u, refs_[l.node()] );
  }

  void consider( Option& slot, GateKind gate, std::vector<Lit> inputs, std::vector<std::uint32_t> const& covered )
  {
    if ( !lib_.allows( GateType{ gate, static_cast<std::uint32_t>( inputs.size() ) } ) )
      return;
    double cost = 1.0;
    for ( auto const l : inputs )
      cost += flow( l );
    if ( cost < slot.cost )
      slot = Option{ Option::Gate, gate, std::move( inputs ), covered, cost };
  }

  void consider_macro( Option& slot, GateKind gate, Lit p, Lit q, std::vector<std::uint32_t> const& covered )
  {
    double const cost = 4.0 + flow( p ) + flow( q );
    if ( cost < slot.cost )
      slot = Option{ Option::XorMacro, gate, { p, q }, covered, cost };
  }

  /// Leaves of the AND supergate rooted at n through single-fanout positive edges, up to the wide limit.
  std::vector<Lit> wide_leaves( std::uint32_t n, std::vector<std::uint32_t>& covered ) const
  {
    std::vector<Lit> leaves{ aig_.node( n ).fanin0, aig_.node( n ).fanin1 };
    covered = { n };
    bool grown = true;
    while ( grown )
    {
      grown = false;
      for ( std::size_t i = 0; i < leaves.size(); ++i )
      {
        auto const l = leaves[i];
        if ( l.complemented() || !aig_.is_and( l.node() ) || refs_[l.node()] != 1 ||
             leaves.size() + 1 > lib_.max_wide_fanin() )
          continue;
        covered.push_back( l.node() );
        leaves[i] = aig_.node( l.node() ).fanin0;
        leaves.insert( leaves.begin() + static_cast<std::ptrdiff_t>( i ) + 1, aig_.node( l.node() ).fanin1 );
        grown = true;
        break;
      }
    }
    // identical literals collapse
    std::vector<Lit> unique;
    for ( auto const l : leaves )
    {
      if ( std::find( unique.begin(), unique.end(), l ) == unique.end() )
        unique.push_back( l );
    }
    return unique;
  }

  /// n = XOR(p, q) when n = !(p&q) & !(!p&!q) with both inner nodes single-fanout.
  std::optional<std::pair<Lit, Lit>> xor_match( std::uint32_t n ) const
  {
    auto const& node = aig_.node( n );
    if ( !node.fanin0.complemented() || !node.fanin1.complemented() )
      return std::nullopt;
    auto const m1 = node.fanin0.node(), m2 = node.fanin1.node();
    if ( !aig_.is_and( m1 ) || !aig_.is_and( m2 ) || refs_[m1] != 1 || refs_[m2] != 1 )
      return std::nullopt;
    auto const a = aig_.node( m1 ), b = aig_.node( m2 );
    if ( ( a.fanin0 == !b.fanin0 && a.fanin1 == !b.fanin1 ) || ( a.fanin0 == !b.fanin1 && a.fanin1 == !b.fanin0 ) )
    {
      // !n = (p & q) | (!p & !q) = XNOR(p, q)
      return std::pair( a.fanin0, a.fanin1 );
    }
    return std::nullopt;
  }

  void compute_costs()
  {
    for ( std::uint32_t n = 1; n < aig_.size(); ++n )
    {
      if ( aig_.is_ci( n ) )
      {
        cost_[n] = { 0.0, 1.0 };
        best_[n][1] = Option{ Option::Inverter, GateKind::Inv, {}, { n }, 1.0 };
        continue;
      }
      if ( !aig_.is_and( n ) )
        continue;
      auto& pos = best_[n][0];
      auto& neg = best_[n][1];

      if ( auto const m = xor_match( n ) )
      {
        auto const [p, q] = *m;
        std::vector<std::uint32_t> covered{ n, aig_.node( n ).fanin0.node(), aig_.node( n ).fanin1.node() };
        if ( lib_.allows( CellFamily::Nand2Nor2 ) )
        {
          consider_macro( pos, GateKind::Nand, p, q, covered );
          consider_macro( pos, GateKind::Nand, !p, !q, covered );
          consider_macro( pos, GateKind::Nor, p, !q, covered );
          consider_macro( pos, GateKind::Nor, !p, q, covered );
          consider_macro( neg, GateKind::Nor, p, q, covered );
          consider_macro( neg, GateKind::Nor, !p, !q, covered );
          consider_macro( neg, GateKind::Nand, p, !q, covered );
          consider_macro( neg, GateKind::Nand, !p, q, covered );
        }
        if ( lib_.allows( CellFamily::XorXnor ) )
        {
          consider( pos, GateKind::Xor, { p, q }, covered );
          consider( pos, GateKind::Xor, { !p, !q }, covered );
          consider( pos, GateKind::Xnor, { p, !q }, covered );
          consider( pos, GateKind::Xnor, { !p, q }, covered );
          consider( neg, GateKind::Xnor, { p, q }, covered );
          consider( neg, GateKind::Xnor, { !p, !q }, covered );
          consider( neg, GateKind::Xor, { p, !q }, covered );
          consider( neg, GateKind::Xor, { !p, q }, covered );
        }
      }

      auto add_cover = [&]( std::vector<Lit> const& leaves, std::vector<std::uint32_t> const& covered ) {
        std::vector<Lit> inverted;
        for ( auto const l : leaves )
          inverted.push_back( !l );
        consider( pos, GateKind::And, leaves, covered );
        consider( pos, GateKind::Nor, inverted, covered );
        consider( neg, GateKind::Nand, leaves, covered );
        consider( neg, GateKind::Or, inverted, covered );
      };
      if ( lib_.allows( CellFamily::AndOrWide ) || lib_.allows( CellFamily::NandNorWide ) )
      {
        std::vector<std::uint32_t> covered;
        auto const leaves = wide_leaves( n, covered );
        if ( leaves.size() > 2 )
          add_cover( leaves, covered );
      }
      add_cover( { aig_.node( n ).fanin0, aig_.node( n ).fanin1 }, { n } );

      if ( neg.cost + 1.0 < pos.cost )
        pos = Option{ Option::Inverter, GateKind::Inv, {}, { n }, neg.cost + 1.0 };
      else if ( pos.cost + 1.0 < neg.cost )
        neg = Option{ Option::Inverter, GateKind::Inv, {}, { n }, pos.cost + 1.0 };
      if ( pos.kind == Option::Unset || neg.kind == Option::Unset )
        throw Error( "technology mapping failed: no allowed cover for node " + std::to_string( n ) );
      cost_[n] = { pos.cost, neg.cost };
    }
  }

  std::string net_name_for( std::uint32_t n, bool complemented )
  {
    auto const& hint = aig_.hint( Lit::make( n, complemented ) );
    if ( !hint.empty() && !reserved_.contains( hint ) && !out_.has_net( hint ) )
      return hint;
    return out_.fresh_net_name( "n" );
  }

  NetId realize( std::uint32_t n, bool complemented )
  {
    if ( auto const net = nets_[n][complemented] )
      return *net;
    auto const& opt = best_[n][complemented];
    NetId net;
    if ( opt.kind == Option::Inverter )
    {
      auto const src = realize( n, !complemented );
      net = out_.add_net( net_name_for( n, complemented ) );
      out_.add_cell( GateKind::Inv, { src }, net, aig_.node( n ).tag );
    }
    else if ( opt.kind == Option::XorMacro )
    {
      auto const a = realize( opt.inputs[0].node(), opt.inputs[0].complemented() );
      auto const b = realize( opt.inputs[1].node(), opt.inputs[1].complemented() );
      auto const tag = detail::majority_tag( aig_, opt.covered );
      auto cell = [&]( NetId x, NetId y, std::string name ) {
        auto const o = out_.add_net( std::move( name ) );
        out_.add_cell( opt.gate, { x, y }, o, tag );
        return o;
      };
      auto const t = cell( a, b, out_.fresh_net_name( "n" ) );
      auto const u = cell( a, t, out_.fresh_net_name( "n" ) );
      auto const v = cell( b, t, out_.fresh_net_name( "n" ) );
      net = cell( u, v, net_name_for( n, complemented ) );
    }
    else
    {
      std::vector<NetId> ins;
      for ( auto const l : opt.inputs )
        ins.push_back( realize( l.node(), l.complemented() ) );
      net = out_.add_net( net_name_for( n, complemented ) );
      out_.add_cell( opt.gate, std::move( ins ), net, detail::majority_tag( aig_, opt.covered ) );
    }
    nets_[n][complemented] = net;
    return net;
  }

  Aig const& aig_;
  CellLibrary const& lib_;
  Netlist out_;
  std::vector<std::uint32_t> refs_;
  std::vector<std::array<Option, 2>> best_;
  std::vector<std::array<double, 2>> cost_;
  std::vector<std::array<std::optional<NetId>, 2>> nets_;
  std::set<std::string> reserved_;
};

} // namespace

Netlist map( Aig const& aig, CellLibrary const& library, std::string const& name )
{
  auto const clean = aig.cleanup();
  return Mapper( clean, library, name ).run();
}

Netlist apply_action( Netlist const& netlist, ActionId action, bool zero_cost )
{
  if ( action == ActionId::Noop )
    return netlist;
  auto const library = library_for_action( action );
  auto aig = netlist_to_aig( netlist );
  aig = rewrite( aig, zero_cost );
  aig = balance( aig );
  aig = refactor( aig, zero_cost );
  return map( aig, library, netlist.name() );
}

std::vector<CellId> allowlist_violations( Netlist const& netlist, ActionId action )
{
  auto const library = library_for_action( action );
  std::vector<CellId> bad;
  for ( CellId c = 0; c < netlist.num_cells(); ++c )
  {
    if ( !library.allows( netlist.cell( c ).type() ) )
      bad.push_back( c );
  }
  return bad;
}

} // namespace netforge
