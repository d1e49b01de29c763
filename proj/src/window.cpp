#include "window.hpp"

#include <algorithm>
#include <map>
#include <unordered_map>

namespace netforge::detail
{

TruthTable cone_function( Aig const& aig, std::uint32_t root, Cut const& leaves )
{
  auto const k = static_cast<std::uint32_t>( leaves.size() );
  std::unordered_map<std::uint32_t, TruthTable> value;
  for ( std::uint32_t i = 0; i < k; ++i )
    value.emplace( leaves[i], TruthTable::nth_var( k, i ) );
  value.emplace( 0, TruthTable::constant( k, false ) );

  std::vector<std::uint32_t> stack{ root };
  while ( !stack.empty() )
  {
    auto const n = stack.back();
    if ( value.contains( n ) )
    {
      stack.pop_back();
      continue;
    }
    auto const& node = aig.node( n );
    auto const a = node.fanin0.node(), b = node.fanin1.node();
    bool pending = false;
    for ( auto const f : { a, b } )
    {
      if ( !value.contains( f ) )
      {
        stack.push_back( f );
        pending = true;
      }
    }
    if ( pending )
      continue;
    auto ta = value.at( a );
    auto tb = value.at( b );
    if ( node.fanin0.complemented() )
      ta = ~ta;
    if ( node.fanin1.complemented() )
      tb = ~tb;
    value.emplace( n, ta & tb );
    stack.pop_back();
  }
  return value.at( root );
}

std::vector<std::vector<Cut>> enumerate_cuts( Aig const& aig, std::uint32_t k, std::uint32_t max_cuts )
{
  std::vector<std::vector<Cut>> cuts( aig.size() );
  for ( std::uint32_t n = 1; n < aig.size(); ++n )
  {
    cuts[n].push_back( { n } );
    if ( !aig.is_and( n ) )
      continue;
    auto const& c0 = cuts[aig.node( n ).fanin0.node()];
    auto const& c1 = cuts[aig.node( n ).fanin1.node()];
    std::vector<Cut> merged;
    for ( auto const& x : c0 )
    {
      for ( auto const& y : c1 )
      {
        Cut u;
        std::set_union( x.begin(), x.end(), y.begin(), y.end(), std::back_inserter( u ) );
        if ( u.size() > k )
          continue;
        merged.push_back( std::move( u ) );
      }
    }
    std::sort( merged.begin(), merged.end(), []( Cut const& a, Cut const& b ) {
      return a.size() != b.size() ? a.size() < b.size() : a < b;
    } );
    merged.erase( std::unique( merged.begin(), merged.end() ), merged.end() );
    // drop dominated cuts (a proper superset of a kept cut)
    std::vector<Cut> kept;
    for ( auto& c : merged )
    {
      bool dominated = false;
      for ( auto const& d : kept )
      {
        if ( std::includes( c.begin(), c.end(), d.begin(), d.end() ) )
        {
          dominated = true;
          break;
        }
      }
      if ( !dominated )
        kept.push_back( std::move( c ) );
      if ( kept.size() >= max_cuts )
        break;
    }
    for ( auto& c : kept )
      cuts[n].push_back( std::move( c ) );
  }
  return cuts;
}

namespace
{

void deref( Aig const& aig, std::uint32_t n, std::vector<std::uint32_t>& refs, Cut const& leaves,
            std::vector<std::uint32_t>& out )
{
  out.push_back( n );
  for ( auto const f : { aig.node( n ).fanin0.node(), aig.node( n ).fanin1.node() } )
  {
    if ( --refs[f] == 0 && aig.is_and( f ) && !std::binary_search( leaves.begin(), leaves.end(), f ) )
      deref( aig, f, refs, leaves, out );
  }
}

} // namespace

std::vector<std::uint32_t> mffc( Aig const& aig, std::uint32_t root, std::vector<std::uint32_t>& refs,
                                 Cut const& leaves )
{
  std::vector<std::uint32_t> nodes;
  if ( !aig.is_and( root ) )
    return nodes;
  deref( aig, root, refs, leaves, nodes );
  for ( auto const n : nodes )
  {
    ++refs[aig.node( n ).fanin0.node()];
    ++refs[aig.node( n ).fanin1.node()];
  }
  std::sort( nodes.begin(), nodes.end() );
  return nodes;
}

Cut reconvergent_cut( Aig const& aig, std::uint32_t root, std::uint32_t max_leaves )
{
  std::vector<std::uint32_t> leaves{ root };
  std::vector<std::uint32_t> visited{ root };
  auto seen = [&]( std::uint32_t n ) { return std::find( visited.begin(), visited.end(), n ) != visited.end(); };
  while ( true )
  {
    std::optional<std::size_t> best;
    int best_cost = 3;
    for ( std::size_t i = 0; i < leaves.size(); ++i )
    {
      auto const l = leaves[i];
      if ( !aig.is_and( l ) )
        continue;
      int cost = -1;
      for ( auto const f : { aig.node( l ).fanin0.node(), aig.node( l ).fanin1.node() } )
        cost += seen( f ) ? 0 : 1;
      if ( static_cast<int>( leaves.size() ) + cost > static_cast<int>( max_leaves ) )
        continue;
      if ( cost < best_cost || ( cost == best_cost && l > leaves[*best] ) )
      {
        best_cost = cost;
        best = i;
      }
    }
    if ( !best )
      break;
    auto const l = leaves[*best];
    leaves.erase( leaves.begin() + static_cast<std::ptrdiff_t>( *best ) );
    for ( auto const f : { aig.node( l ).fanin0.node(), aig.node( l ).fanin1.node() } )
    {
      if ( !seen( f ) )
      {
        visited.push_back( f );
        leaves.push_back( f );
      }
    }
  }
  std::sort( leaves.begin(), leaves.end() );
  return leaves;
}

std::int32_t majority_tag( Aig const& aig, std::vector<std::uint32_t> const& nodes )
{
  std::map<std::int32_t, std::uint32_t> votes;
  for ( auto const n : nodes )
  {
    if ( aig.node( n ).tag >= 0 )
      ++votes[aig.node( n ).tag];
  }
  std::int32_t best = -1;
  std::uint32_t best_votes = 0;
  for ( auto const& [tag, count] : votes )
  {
    if ( count > best_votes )
    {
      best = tag;
      best_votes = count;
    }
  }
  return best;
}

} // namespace netforge::detail
