#include "resynthesis.hpp"

#include <algorithm>
#include <bit>
#include <map>

namespace netforge::detail
{

namespace
{

TruthTable isop_rec( TruthTable const& lower, TruthTable const& upper, int var, std::vector<Cube>& cubes )
{
  auto const n = lower.num_vars();
  if ( lower.is_const0() )
    return TruthTable::constant( n, false );
  if ( upper.is_const1() )
  {
    cubes.push_back( {} );
    return TruthTable::constant( n, true );
  }
  int v = var - 1;
  while ( v >= 0 && !lower.depends_on( v ) && !upper.depends_on( v ) )
    --v;
  auto const uv = static_cast<std::uint32_t>( v );
  auto const l0 = lower.cofactor( uv, false ), l1 = lower.cofactor( uv, true );
  auto const u0 = upper.cofactor( uv, false ), u1 = upper.cofactor( uv, true );

  auto const first0 = cubes.size();
  auto const r0 = isop_rec( l0 & ~u1, u0, v, cubes );
  for ( auto i = first0; i < cubes.size(); ++i )
    cubes[i].mask |= 1u << uv;
  auto const first1 = cubes.size();
  auto const r1 = isop_rec( l1 & ~u0, u1, v, cubes );
  for ( auto i = first1; i < cubes.size(); ++i )
  {
    cubes[i].mask |= 1u << uv;
    cubes[i].polarity |= 1u << uv;
  }
  auto const rest = ( l0 & ~r0 ) | ( l1 & ~r1 );
  auto const rd = isop_rec( rest, u0 & u1, v, cubes );
  auto const x = TruthTable::nth_var( n, uv );
  return ( r0 & ~x ) | ( r1 & x ) | rd;
}

class Builder
{
public:
  explicit Builder( std::uint32_t num_leaves ) { program_.num_leaves = num_leaves; }

  std::uint32_t leaf( std::uint32_t i ) const { return ( i + 1 ) << 1; }

  std::uint32_t land( std::uint32_t a, std::uint32_t b )
  {
    if ( a == 0 || b == 0 || a == ( b ^ 1u ) )
      return 0;
    if ( a == 1 )
      return b;
    if ( b == 1 || a == b )
      return a;
    if ( b < a )
      std::swap( a, b );
    auto const [it, inserted] = strash_.emplace( std::pair( a, b ), 0 );
    if ( inserted )
    {
      it->second = ( program_.num_leaves + 1 + static_cast<std::uint32_t>( program_.ops.size() ) ) << 1;
      program_.ops.emplace_back( a, b );
    }
    return it->second;
  }
  std::uint32_t lor( std::uint32_t a, std::uint32_t b ) { return land( a ^ 1u, b ^ 1u ) ^ 1u; }
  std::uint32_t lxor( std::uint32_t a, std::uint32_t b ) { return lor( land( a, b ^ 1u ), land( a ^ 1u, b ) ); }

  std::uint32_t and_all( std::vector<std::uint32_t> lits )
  {
    if ( lits.empty() )
      return 1;
    while ( lits.size() > 1 )
    {
      std::vector<std::uint32_t> next;
      for ( std::size_t i = 0; i + 1 < lits.size(); i += 2 )
        next.push_back( land( lits[i], lits[i + 1] ) );
      if ( lits.size() % 2 )
        next.push_back( lits.back() );
      lits = std::move( next );
    }
    return lits[0];
  }

  std::uint32_t or_all( std::vector<std::uint32_t> lits )
  {
    for ( auto& l : lits )
      l ^= 1u;
    return and_all( std::move( lits ) ) ^ 1u;
  }

  Program finish( std::uint32_t output )
  {
    program_.output = output;
    return std::move( program_ );
  }

private:
  Program program_;
  std::map<std::pair<std::uint32_t, std::uint32_t>, std::uint32_t> strash_;
};

std::uint32_t cube_lits( Builder& b, Cube const& c )
{
  std::vector<std::uint32_t> lits;
  for ( std::uint32_t v = 0; v < 8; ++v )
  {
    if ( ( c.mask >> v ) & 1u )
      lits.push_back( b.leaf( v ) ^ ( ( ( c.polarity >> v ) & 1u ) ? 0u : 1u ) );
  }
  return b.and_all( std::move( lits ) );
}

/// Algebraic factoring: repeatedly divide by the most frequent literal.
std::uint32_t factor( Builder& b, std::vector<Cube> const& cubes )
{
  if ( cubes.empty() )
    return 0;
  if ( cubes.size() == 1 )
    return cube_lits( b, cubes[0] );
  std::uint32_t best_count = 0, best_var = 0;
  bool best_pos = false;
  for ( std::uint32_t v = 0; v < 8; ++v )
  {
    for ( bool pos : { true, false } )
    {
      std::uint32_t count = 0;
      for ( auto const& c : cubes )
      {
        if ( ( ( c.mask >> v ) & 1u ) && ( ( ( c.polarity >> v ) & 1u ) != 0 ) == pos )
          ++count;
      }
      if ( count > best_count )
      {
        best_count = count;
        best_var = v;
        best_pos = pos;
      }
    }
  }
  if ( best_count < 2 )
  {
    std::vector<std::uint32_t> terms;
    for ( auto const& c : cubes )
      terms.push_back( cube_lits( b, c ) );
    return b.or_all( std::move( terms ) );
  }
  std::vector<Cube> quotient, rest;
  for ( auto const& c : cubes )
  {
    if ( ( ( c.mask >> best_var ) & 1u ) && ( ( ( c.polarity >> best_var ) & 1u ) != 0 ) == best_pos )
      quotient.push_back( { c.mask & ~( 1u << best_var ), c.polarity & ~( 1u << best_var ) } );
    else
      rest.push_back( c );
  }
  auto const lit = b.leaf( best_var ) ^ ( best_pos ? 0u : 1u );
  auto const q = b.land( lit, factor( b, quotient ) );
  if ( rest.empty() )
    return q;
  return b.lor( q, factor( b, rest ) );
}

std::uint32_t literal_count( std::vector<Cube> const& cubes )
{
  std::uint32_t n = 0;
  for ( auto const& c : cubes )
    n += std::popcount( c.mask );
  return n;
}

/// Peels single-variable AND/OR/XOR decompositions, then falls back to the smaller factored ISOP.
std::uint32_t decompose( Builder& b, TruthTable const& f )
{
  if ( f.is_const0() )
    return 0;
  if ( f.is_const1() )
    return 1;
  auto const n = f.num_vars();
  for ( std::uint32_t v = 0; v < n; ++v )
  {
    if ( !f.depends_on( v ) )
      continue;
    auto const f0 = f.cofactor( v, false ), f1 = f.cofactor( v, true );
    auto const x = b.leaf( v );
    if ( f0.is_const0() )
      return b.land( x, decompose( b, f1 ) );
    if ( f1.is_const0() )
      return b.land( x ^ 1u, decompose( b, f0 ) );
    if ( f0.is_const1() )
      return b.lor( x ^ 1u, decompose( b, f1 ) );
    if ( f1.is_const1() )
      return b.lor( x, decompose( b, f0 ) );
    if ( f0 == ~f1 )
      return b.lxor( x, decompose( b, f0 ) );
  }
  auto const on = isop( f );
  auto const off = isop( ~f );
  if ( literal_count( off ) < literal_count( on ) )
    return factor( b, off ) ^ 1u;
  return factor( b, on );
}

} // namespace

std::vector<Cube> isop( TruthTable const& f )
{
  std::vector<Cube> cubes;
  isop_rec( f, f, static_cast<int>( f.num_vars() ), cubes );
  return cubes;
}

std::vector<Program> synthesize( TruthTable const& f )
{
  auto const k = f.num_vars();
  std::vector<Program> result;
  {
    Builder b( k );
    auto const out = factor( b, isop( f ) );
    result.push_back( b.finish( out ) );
  }
  {
    Builder b( k );
    auto const out = factor( b, isop( ~f ) ) ^ 1u;
    result.push_back( b.finish( out ) );
  }
  {
    Builder b( k );
    auto const out = decompose( b, f );
    result.push_back( b.finish( out ) );
  }
  return result;
}

ProgramCost evaluate( Program const& p, Aig const& aig, std::vector<Lit> const& leaves,
                      std::set<std::uint32_t> const& doomed )
{
  ProgramCost r;
  std::vector<std::optional<Lit>> value( p.ops.size() );
  std::set<std::uint32_t> reused;
  auto resolve = [&]( std::uint32_t lit ) -> std::optional<Lit> {
    auto const ref = lit >> 1;
    bool const c = lit & 1u;
    if ( ref == 0 )
      return lit_false ^ c;
    if ( ref <= p.num_leaves )
      return leaves[ref - 1] ^ c;
    auto const& v = value[ref - p.num_leaves - 1];
    if ( !v )
      return std::nullopt;
    return *v ^ c;
  };
  for ( std::size_t i = 0; i < p.ops.size(); ++i )
  {
    auto const a = resolve( p.ops[i].first );
    auto const b = resolve( p.ops[i].second );
    if ( a && b )
    {
      if ( auto const hit = aig.find_and( *a, *b ) )
      {
        value[i] = *hit;
        if ( doomed.contains( hit->node() ) && reused.insert( hit->node() ).second )
          ++r.cost;
        continue;
      }
    }
    ++r.cost;
    ++r.added;
  }
  r.existing = resolve( p.output );
  return r;
}

Lit instantiate( Program const& p, Aig& aig, std::vector<Lit> const& leaves )
{
  std::vector<Lit> value( p.ops.size() );
  auto resolve = [&]( std::uint32_t lit ) {
    auto const ref = lit >> 1;
    bool const c = lit & 1u;
    if ( ref == 0 )
      return lit_false ^ c;
    if ( ref <= p.num_leaves )
      return leaves[ref - 1] ^ c;
    return value[ref - p.num_leaves - 1] ^ c;
  };
  for ( std::size_t i = 0; i < p.ops.size(); ++i )
    value[i] = aig.create_and( resolve( p.ops[i].first ), resolve( p.ops[i].second ) );
  return resolve( p.output );
}

TruthTable program_function( Program const& p )
{
  std::vector<TruthTable> value;
  auto resolve = [&]( std::uint32_t lit ) {
    auto const ref = lit >> 1;
    bool const c = lit & 1u;
    TruthTable t = ref == 0                  ? TruthTable::constant( p.num_leaves, false )
                   : ref <= p.num_leaves ? TruthTable::nth_var( p.num_leaves, ref - 1 )
                                         : value[ref - p.num_leaves - 1];
    return c ? ~t : t;
  };
  for ( auto const& [a, b] : p.ops )
    value.push_back( resolve( a ) & resolve( b ) );
  return resolve( p.output );
}

} // namespace netforge::detail
