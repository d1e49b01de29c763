#include <netforge/transforms.hpp>

#include "rebuild.hpp"
#include "resynthesis.hpp"
#include "window.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace netforge
{

using namespace detail;

namespace
{

struct Choice
{
  Program program;
  Cut leaves;
  int gain = 0;
};

/// Best program for `root` among the candidate functions, or nothing when no candidate passes the acceptance rule.
std::optional<Choice> best_replacement( Rebuild& rb, std::uint32_t root, std::vector<Cut> const& cuts,
                                        std::vector<std::uint32_t>& refs, bool zero_cost,
                                        std::vector<std::uint32_t>* cone_out )
{
  auto const& src = rb.src();
  std::optional<Choice> best;
  for ( auto const& cut : cuts )
  {
    auto const tt = cone_function( src, root, cut );
    auto const cone = mffc( src, root, refs, cut );
    std::set<std::uint32_t> doomed;
    for ( auto const m : cone )
    {
      if ( m != root )
        doomed.insert( rb.image( m ).node() );
    }
    std::vector<Lit> leaves;
    for ( auto const l : cut )
      leaves.push_back( rb.image( l ) );
    for ( auto& program : synthesize( tt ) )
    {
      auto const pc = evaluate( program, rb.dst(), leaves, doomed );
      auto const gain = static_cast<int>( cone.size() ) - static_cast<int>( pc.cost );
      bool const acceptable = gain > 0 || ( zero_cost && gain == 0 && pc.added > 0 );
      if ( !acceptable || ( best && gain <= best->gain ) )
        continue;
      best = Choice{ std::move( program ), cut, gain };
      if ( cone_out )
        *cone_out = cone;
    }
  }
  return best;
}

Aig guarded( Aig const& src, Aig result )
{
  if ( result.num_ands() > src.num_ands() )
    return src.cleanup();
  return result;
}

} // namespace

Aig rewrite( Aig const& aig, bool zero_cost )
{
  auto const cuts = enumerate_cuts( aig, 4, 8 );
  auto refs = aig.fanout_counts();
  Rebuild rb( aig );
  for ( std::uint32_t n = 1; n < aig.size(); ++n )
  {
    if ( !aig.is_and( n ) )
      continue;
    std::vector<Cut> candidates( cuts[n].begin() + 1, cuts[n].end() );
    std::vector<std::uint32_t> cone;
    auto const choice = best_replacement( rb, n, candidates, refs, zero_cost, &cone );
    if ( !choice )
    {
      rb.copy( n );
      continue;
    }
    std::vector<Lit> leaves;
    for ( auto const l : choice->leaves )
      leaves.push_back( rb.image( l ) );
    rb.dst().set_current_tag( majority_tag( aig, cone ) );
    rb.assign( n, instantiate( choice->program, rb.dst(), leaves ) );
  }
  return guarded( aig, rb.finish() );
}

Aig refactor( Aig const& aig, bool zero_cost )
{
  auto refs = aig.fanout_counts();
  Rebuild rb( aig );
  for ( std::uint32_t n = 1; n < aig.size(); ++n )
  {
    if ( !aig.is_and( n ) )
      continue;
    auto const leaves = reconvergent_cut( aig, n, 8 );
    std::vector<std::uint32_t> cone;
    std::optional<Choice> choice;
    if ( mffc( aig, n, refs, leaves ).size() >= ( zero_cost ? 1u : 2u ) )
      choice = best_replacement( rb, n, { leaves }, refs, zero_cost, &cone );
    if ( !choice )
    {
      rb.copy( n );
      continue;
    }
    std::vector<Lit> images;
    for ( auto const l : choice->leaves )
      images.push_back( rb.image( l ) );
    rb.dst().set_current_tag( majority_tag( aig, cone ) );
    rb.assign( n, instantiate( choice->program, rb.dst(), images ) );
  }
  return guarded( aig, rb.finish() );
}

Aig resub( Aig const& aig, bool zero_cost )
{
  constexpr std::size_t max_divisors = 50;
  auto refs = aig.fanout_counts();
  std::vector<bool> dead( aig.size(), false );
  Rebuild rb( aig );
  for ( std::uint32_t n = 1; n < aig.size(); ++n )
  {
    if ( !aig.is_and( n ) )
      continue;
    if ( dead[n] )
    {
      rb.copy( n );
      continue;
    }
    auto const leaves = reconvergent_cut( aig, n, 8 );
    auto const cone = mffc( aig, n, refs, leaves );
    auto const k = static_cast<std::uint32_t>( leaves.size() );

    // window nodes: everything between the leaves and n, then side nodes supported by the window
    std::map<std::uint32_t, TruthTable> value;
    for ( std::uint32_t i = 0; i < k; ++i )
      value.emplace( leaves[i], TruthTable::nth_var( k, i ) );
    std::vector<std::uint32_t> inner;
    {
      std::vector<std::uint32_t> stack{ n };
      std::set<std::uint32_t> seen( leaves.begin(), leaves.end() );
      while ( !stack.empty() )
      {
        auto const m = stack.back();
        stack.pop_back();
        if ( !seen.insert( m ).second )
          continue;
        inner.push_back( m );
        stack.push_back( aig.node( m ).fanin0.node() );
        stack.push_back( aig.node( m ).fanin1.node() );
      }
      std::sort( inner.begin(), inner.end() );
    }
    auto eval = [&]( std::uint32_t m ) {
      auto const& node = aig.node( m );
      auto a = value.at( node.fanin0.node() );
      auto b = value.at( node.fanin1.node() );
      if ( node.fanin0.complemented() )
        a = ~a;
      if ( node.fanin1.complemented() )
        b = ~b;
      value.emplace( m, a & b );
    };
    if ( !value.contains( 0 ) )
      value.emplace( 0, TruthTable::constant( k, false ) );
    for ( auto const m : inner )
      eval( m );

    std::vector<std::uint32_t> divisors;
    for ( auto const l : leaves )
      divisors.push_back( l );
    for ( auto const m : inner )
    {
      if ( m != n && !std::binary_search( cone.begin(), cone.end(), m ) && !dead[m] )
        divisors.push_back( m );
    }
    for ( std::uint32_t m = leaves.front() + 1; m < n && divisors.size() < max_divisors; ++m )
    {
      if ( !aig.is_and( m ) || dead[m] || value.contains( m ) )
        continue;
      auto const a = aig.node( m ).fanin0.node(), b = aig.node( m ).fanin1.node();
      if ( !value.contains( a ) || !value.contains( b ) )
        continue;
      // a fanin inside the MFFC would keep the cone alive
      if ( std::binary_search( cone.begin(), cone.end(), a ) || std::binary_search( cone.begin(), cone.end(), b ) )
        continue;
      eval( m );
      divisors.push_back( m );
    }
    if ( divisors.size() > max_divisors )
      divisors.resize( max_divisors );

    auto const& target = value.at( n );
    std::set<std::uint32_t> doomed;
    for ( auto const m : cone )
    {
      if ( m != n )
        doomed.insert( rb.image( m ).node() );
    }
    auto const gain0 = static_cast<int>( cone.size() );

    std::optional<Lit> replacement;
    std::int32_t tag = majority_tag( aig, cone );
    for ( auto const d : divisors )
    {
      auto const& t = value.at( d );
      if ( t == target || t == ~target )
      {
        auto const lit = rb.image( d ) ^ ( t != target );
        if ( lit != rb.dst().find_and( rb.image( aig.node( n ).fanin0 ), rb.image( aig.node( n ).fanin1 ) ) )
        {
          replacement = lit;
          break;
        }
      }
    }
    if ( !replacement && ( gain0 >= 2 || zero_cost ) )
    {
      auto const sig = target.words()[0];
      for ( std::size_t i = 0; i < divisors.size() && !replacement; ++i )
      {
        for ( std::size_t j = i + 1; j < divisors.size() && !replacement; ++j )
        {
          auto const& ti = value.at( divisors[i] );
          auto const& tj = value.at( divisors[j] );
          for ( std::uint32_t pol = 0; pol < 4 && !replacement; ++pol )
          {
            bool const pi = pol & 1u, pj = pol & 2u;
            auto const wi = pi ? ~ti.words()[0] : ti.words()[0];
            auto const wj = pj ? ~tj.words()[0] : tj.words()[0];
            auto const mask = k >= 6 ? ~std::uint64_t{ 0 } : ( std::uint64_t{ 1 } << ( 1u << k ) ) - 1;
            auto const w = wi & wj & mask;
            bool const direct = w == sig, inverted = w == ( ~sig & mask );
            if ( !direct && !inverted )
              continue;
            auto const f = ( pi ? ~ti : ti ) & ( pj ? ~tj : tj );
            if ( f != target && f != ~target )
              continue;
            auto const a = rb.image( divisors[i] ) ^ pi;
            auto const b = rb.image( divisors[j] ) ^ pj;
            auto const existing = rb.dst().find_and( a, b );
            int cost = 1;
            if ( existing && !doomed.contains( existing->node() ) )
              cost = 0;
            auto const gain = gain0 - cost;
            bool const fresh = !existing;
            if ( gain > 0 || ( zero_cost && gain == 0 && fresh ) )
            {
              rb.dst().set_current_tag( tag );
              replacement = rb.dst().create_and( a, b ) ^ ( f != target );
            }
          }
        }
      }
    }
    if ( !replacement )
    {
      rb.copy( n );
      continue;
    }
    rb.assign( n, *replacement );
    for ( auto const m : cone )
    {
      if ( m != n )
        dead[m] = true;
    }
  }
  return guarded( aig, rb.finish() );
}

Aig balance( Aig const& aig )
{
  auto const refs = aig.fanout_counts();
  std::vector<std::uint32_t> positive_and_refs( aig.size(), 0 );
  for ( std::uint32_t m = 1; m < aig.size(); ++m )
  {
    if ( !aig.is_and( m ) )
      continue;
    for ( auto const f : { aig.node( m ).fanin0, aig.node( m ).fanin1 } )
    {
      if ( !f.complemented() )
        ++positive_and_refs[f.node()];
    }
  }
  auto absorbed = [&]( Lit e ) {
    return !e.complemented() && aig.is_and( e.node() ) && refs[e.node()] == 1 && positive_and_refs[e.node()] == 1;
  };

  Rebuild rb( aig );
  auto& dst = rb.dst();
  std::vector<std::uint32_t> level;
  auto level_of = [&]( Lit l ) {
    for ( auto i = static_cast<std::uint32_t>( level.size() ); i < dst.size(); ++i )
    {
      level.push_back( dst.is_and( i ) ? 1 + std::max( level[dst.node( i ).fanin0.node()],
                                                       level[dst.node( i ).fanin1.node()] )
                                       : 0 );
    }
    return level[l.node()];
  };

  for ( std::uint32_t n = 1; n < aig.size(); ++n )
  {
    if ( !aig.is_and( n ) || absorbed( Lit::make( n ) ) )
      continue;
    std::vector<Lit> leaves;
    std::vector<std::uint32_t> internal;
    auto collect = [&]( auto&& self, std::uint32_t m ) -> void {
      internal.push_back( m );
      for ( auto const f : { aig.node( m ).fanin0, aig.node( m ).fanin1 } )
      {
        if ( absorbed( f ) )
          self( self, f.node() );
        else
          leaves.push_back( rb.image( f ) );
      }
    };
    collect( collect, n );
    dst.set_current_tag( majority_tag( aig, internal ) );

    // level of the existing tree over the images of its leaves
    auto tree_level = [&]( auto&& self, std::uint32_t m ) -> std::uint32_t {
      std::uint32_t lv = 0;
      for ( auto const f : { aig.node( m ).fanin0, aig.node( m ).fanin1 } )
        lv = std::max( lv, absorbed( f ) ? self( self, f.node() ) : level_of( rb.image( f ) ) );
      return lv + 1;
    };
    auto const current = tree_level( tree_level, n );

    std::sort( leaves.begin(), leaves.end() );
    leaves.erase( std::unique( leaves.begin(), leaves.end() ), leaves.end() );
    bool contradiction = false;
    for ( std::size_t i = 0; i + 1 < leaves.size(); ++i )
      contradiction |= leaves[i] == !leaves[i + 1];
    if ( contradiction || std::find( leaves.begin(), leaves.end(), lit_false ) != leaves.end() )
    {
      rb.assign( n, lit_false );
      continue;
    }

    using Item = std::pair<std::uint32_t, std::uint32_t>; // level, literal
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    std::priority_queue<std::uint32_t, std::vector<std::uint32_t>, std::greater<>> levels_only;
    for ( auto const l : leaves )
    {
      heap.emplace( level_of( l ), l.raw() );
      levels_only.push( level_of( l ) );
    }
    while ( levels_only.size() > 1 )
    {
      auto const a = levels_only.top();
      levels_only.pop();
      auto const b = levels_only.top();
      levels_only.pop();
      levels_only.push( std::max( a, b ) + 1 );
    }
    auto const optimal = levels_only.top();

    if ( current <= optimal )
    {
      auto rebuild_tree = [&]( auto&& self, std::uint32_t m ) -> Lit {
        Lit ins[2];
        int i = 0;
        for ( auto const f : { aig.node( m ).fanin0, aig.node( m ).fanin1 } )
          ins[i++] = absorbed( f ) ? self( self, f.node() ) : rb.image( f );
        return dst.create_and( ins[0], ins[1] );
      };
      rb.assign( n, rebuild_tree( rebuild_tree, n ) );
      continue;
    }
    while ( heap.size() > 1 )
    {
      auto const a = Lit( heap.top().second );
      heap.pop();
      auto const b = Lit( heap.top().second );
      heap.pop();
      auto const r = dst.create_and( a, b );
      heap.emplace( level_of( r ), r.raw() );
    }
    rb.assign( n, Lit( heap.top().second ) );
  }
  auto result = rb.finish();
  auto const d0 = aig.depth(), d1 = result.depth();
  if ( d1 < d0 || ( d1 == d0 && result.num_ands() <= aig.num_ands() ) )
    return result;
  return aig.cleanup();
}

} // namespace netforge
