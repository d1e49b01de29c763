#include <netforge/equivalence.hpp>

#include <netforge/error.hpp>
#include <netforge/simulate.hpp>

#include <bit>
#include <map>
#include <random>

namespace netforge
{

std::string_view to_string( EquivalenceStatus status )
{
  switch ( status )
  {
  case EquivalenceStatus::EquivalentExhaustive:
    return "EQUIVALENT_EXHAUSTIVE";
  case EquivalenceStatus::NotEquivalent:
    return "NOT_EQUIVALENT";
  case EquivalenceStatus::Unfalsified:
    return "UNFALSIFIED";
  }
  return "?";
}

namespace
{

/// Output key: latch next-state functions live in their own namespace.
std::string co_key( Aig const& aig, std::size_t o )
{
  return o < aig.num_pos() ? "po:" + aig.co_name( o ) : "latch:" + aig.co_name( o );
}

} // namespace

EquivalenceVerdict check_equivalence( Aig const& a, Aig const& b, EquivalenceBudget const& budget )
{
  if ( a.num_pis() != b.num_pis() || a.num_latches() != b.num_latches() )
    throw InterfaceError( "circuits have different input counts" );
  std::map<std::string, std::size_t> b_ci;
  for ( std::size_t i = 0; i < b.num_cis(); ++i )
    b_ci.emplace( b.ci_name( i ), i );
  std::vector<std::size_t> ci_map( a.num_cis() );
  for ( std::size_t i = 0; i < a.num_cis(); ++i )
  {
    auto const it = b_ci.find( a.ci_name( i ) );
    if ( it == b_ci.end() || ( i < a.num_pis() ) != ( it->second < b.num_pis() ) )
      throw InterfaceError( "input '" + a.ci_name( i ) + "' has no counterpart" );
    ci_map[i] = it->second;
  }
  if ( a.num_cos() != b.num_cos() )
    throw InterfaceError( "circuits have different output counts" );
  std::map<std::string, std::size_t> b_co;
  for ( std::size_t o = 0; o < b.num_cos(); ++o )
    b_co.emplace( co_key( b, o ), o );
  std::vector<std::size_t> co_map( a.num_cos() );
  for ( std::size_t o = 0; o < a.num_cos(); ++o )
  {
    auto const it = b_co.find( co_key( a, o ) );
    if ( it == b_co.end() )
      throw InterfaceError( "output '" + a.co_name( o ) + "' has no counterpart" );
    co_map[o] = it->second;
  }

  EquivalenceVerdict verdict;
  for ( std::size_t i = 0; i < a.num_cis(); ++i )
    verdict.input_names.push_back( a.ci_name( i ) );

  auto const k = a.num_cis();
  bool const exhaustive = k <= budget.max_exhaustive_inputs;
  std::uint64_t const vectors = exhaustive ? ( std::uint64_t{ 1 } << k ) : budget.n_random;
  auto const words = std::max<std::uint64_t>( 1, ( vectors + 63 ) / 64 );
  PatternWords pa( k, std::vector<std::uint64_t>( words ) );
  if ( exhaustive )
  {
    for ( std::size_t i = 0; i < k; ++i )
    {
      for ( std::uint64_t w = 0; w < words; ++w )
      {
        std::uint64_t bits = 0;
        for ( std::uint64_t j = 0; j < 64; ++j )
          bits |= ( ( ( w * 64 + j ) >> i ) & 1u ) << j;
        pa[i][w] = bits;
      }
    }
  }
  else
  {
    std::mt19937_64 rng( budget.seed );
    for ( std::uint64_t w = 0; w < words; ++w )
      for ( std::size_t i = 0; i < k; ++i )
        pa[i][w] = rng();
    verdict.seed = budget.seed;
  }
  PatternWords pb( k );
  for ( std::size_t i = 0; i < k; ++i )
    pb[ci_map[i]] = pa[i];

  auto const oa = simulate_words( a, pa );
  auto const ob = simulate_words( b, pb );
  auto const tail = vectors % 64;
  for ( std::uint64_t w = 0; w < words; ++w )
  {
    std::uint64_t const mask = ( w + 1 == words && tail ) ? ( std::uint64_t{ 1 } << tail ) - 1 : ~std::uint64_t{ 0 };
    std::uint64_t diff = 0;
    for ( std::size_t o = 0; o < a.num_cos(); ++o )
      diff |= ( oa[o][w] ^ ob[co_map[o]][w] ) & mask;
    if ( !diff )
      continue;
    auto const bit = static_cast<std::uint64_t>( std::countr_zero( diff ) );
    verdict.status = EquivalenceStatus::NotEquivalent;
    for ( std::size_t i = 0; i < k; ++i )
      verdict.counterexample.push_back( ( pa[i][w] >> bit ) & 1u );
    for ( std::size_t o = 0; o < a.num_cos(); ++o )
    {
      if ( ( ( oa[o][w] ^ ob[co_map[o]][w] ) >> bit ) & 1u )
      {
        verdict.failing_output = a.co_name( o );
        break;
      }
    }
    verdict.vectors = w * 64 + bit + 1;
    return verdict;
  }
  verdict.status = exhaustive ? EquivalenceStatus::EquivalentExhaustive : EquivalenceStatus::Unfalsified;
  verdict.vectors = vectors;
  return verdict;
}

EquivalenceVerdict check_equivalence( Netlist const& a, Netlist const& b, EquivalenceBudget const& budget )
{
  return check_equivalence( netlist_to_aig( a ), netlist_to_aig( b ), budget );
}

} // namespace netforge
