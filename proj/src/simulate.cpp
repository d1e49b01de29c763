#include <netforge/simulate.hpp>

#include <netforge/error.hpp>

#include <omp.h>

namespace netforge
{

namespace
{

std::size_t word_count( Aig const& aig, PatternWords const& ci_words )
{
  if ( ci_words.size() != aig.num_cis() )
    throw InterfaceError( "expected " + std::to_string( aig.num_cis() ) + " input signals, got " +
                          std::to_string( ci_words.size() ) );
  std::size_t words = ci_words.empty() ? 1 : ci_words[0].size();
  for ( auto const& w : ci_words )
  {
    if ( w.size() != words )
      throw InterfaceError( "input pattern words differ in length" );
  }
  return words;
}

/// Evaluates word `w` of every node into `value` (sized to the AIG).
void simulate_word( Aig const& aig, PatternWords const& ci_words, std::size_t w, std::vector<std::uint64_t>& value )
{
  value[0] = 0;
  for ( std::size_t i = 0; i < aig.num_cis(); ++i )
    value[aig.cis()[i]] = ci_words[i][w];
  for ( std::uint32_t n = 1; n < aig.size(); ++n )
  {
    if ( !aig.is_and( n ) )
      continue;
    auto const& node = aig.node( n );
    auto const a = value[node.fanin0.node()] ^ ( node.fanin0.complemented() ? ~std::uint64_t{ 0 } : 0 );
    auto const b = value[node.fanin1.node()] ^ ( node.fanin1.complemented() ? ~std::uint64_t{ 0 } : 0 );
    value[n] = a & b;
  }
}

void collect_outputs( Aig const& aig, std::vector<std::uint64_t> const& value, std::size_t w, PatternWords& out )
{
  for ( std::size_t o = 0; o < aig.num_cos(); ++o )
  {
    auto const co = aig.cos()[o];
    out[o][w] = value[co.node()] ^ ( co.complemented() ? ~std::uint64_t{ 0 } : 0 );
  }
}

} // namespace

PatternWords simulate_words( Aig const& aig, PatternWords const& ci_words )
{
  auto const words = word_count( aig, ci_words );
  PatternWords out( aig.num_cos(), std::vector<std::uint64_t>( words ) );
  auto const n = static_cast<std::int64_t>( words );
#pragma omp parallel
  {
    std::vector<std::uint64_t> value( aig.size() );
#pragma omp for schedule( static )
    for ( std::int64_t w = 0; w < n; ++w )
    {
      simulate_word( aig, ci_words, static_cast<std::size_t>( w ), value );
      collect_outputs( aig, value, static_cast<std::size_t>( w ), out );
    }
  }
  return out;
}

PatternWords simulate_words_serial( Aig const& aig, PatternWords const& ci_words )
{
  auto const words = word_count( aig, ci_words );
  PatternWords out( aig.num_cos(), std::vector<std::uint64_t>( words ) );
  std::vector<std::uint64_t> value( aig.size() );
  for ( std::size_t w = 0; w < words; ++w )
  {
    simulate_word( aig, ci_words, w, value );
    collect_outputs( aig, value, w, out );
  }
  return out;
}

std::vector<std::vector<bool>> simulate( Aig const& aig, std::vector<std::vector<bool>> const& vectors )
{
  auto const words = ( vectors.size() + 63 ) / 64;
  PatternWords ci( aig.num_cis(), std::vector<std::uint64_t>( std::max<std::size_t>( words, 1 ), 0 ) );
  for ( std::size_t v = 0; v < vectors.size(); ++v )
  {
    if ( vectors[v].size() != aig.num_cis() )
      throw InterfaceError( "assignment " + std::to_string( v ) + " has " + std::to_string( vectors[v].size() ) +
                            " values, expected " + std::to_string( aig.num_cis() ) );
    for ( std::size_t i = 0; i < aig.num_cis(); ++i )
    {
      if ( vectors[v][i] )
        ci[i][v / 64] |= std::uint64_t{ 1 } << ( v % 64 );
    }
  }
  auto const out = simulate_words( aig, ci );
  std::vector<std::vector<bool>> result( vectors.size(), std::vector<bool>( aig.num_cos() ) );
  for ( std::size_t v = 0; v < vectors.size(); ++v )
  {
    for ( std::size_t o = 0; o < aig.num_cos(); ++o )
      result[v][o] = ( out[o][v / 64] >> ( v % 64 ) ) & 1u;
  }
  return result;
}

std::vector<bool> simulate_scalar( Aig const& aig, std::vector<bool> const& assignment )
{
  if ( assignment.size() != aig.num_cis() )
    throw InterfaceError( "assignment has " + std::to_string( assignment.size() ) + " values, expected " +
                          std::to_string( aig.num_cis() ) );
  std::vector<bool> value( aig.size(), false );
  for ( std::size_t i = 0; i < aig.num_cis(); ++i )
    value[aig.cis()[i]] = assignment[i];
  for ( std::uint32_t n = 1; n < aig.size(); ++n )
  {
    if ( !aig.is_and( n ) )
      continue;
    auto const& node = aig.node( n );
    value[n] = ( value[node.fanin0.node()] != node.fanin0.complemented() ) &&
               ( value[node.fanin1.node()] != node.fanin1.complemented() );
  }
  std::vector<bool> out;
  for ( auto const co : aig.cos() )
    out.push_back( value[co.node()] != co.complemented() );
  return out;
}

} // namespace netforge
